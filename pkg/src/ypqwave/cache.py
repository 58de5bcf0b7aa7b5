"""Persistent radial-eigenmode cache.

Entries are JSON files keyed by a canonical serialization of the solve
parameters; the payload carries its own checksum.  Writes go to a
temporary name followed by an atomic rename, so concurrent processes
sharing a cache directory get last-writer-wins without torn reads.  A
checksum mismatch is treated as a miss: the entry is re-solved and
overwritten, with a warning.

Numbers are serialized as shortest round-trip decimal strings (json's
float repr), so a cache hit reproduces the in-memory eigenpairs bitwise.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CacheCorrupt
from .geometry import GeometryParams
from .radial import RadialMode, RadialProblem

__all__ = ["CacheKey", "cache_get_or_solve", "SOLVER_VERSION"]

# bump on any change to the radial discretization
SOLVER_VERSION = "galerkin-jacobi-1"


@dataclass(frozen=True)
class CacheKey:
    p: int
    q: int
    sigma_rule: str
    m: int
    l: int
    lambda_cap: float
    n_basis: int
    solver_version: str = SOLVER_VERSION

    def canonical(self) -> str:
        """Bit-stable serialization; equal keys serialize identically."""
        return json.dumps({
            "p": self.p, "q": self.q, "sigma_rule": self.sigma_rule,
            "m": self.m, "l": self.l,
            "lambda_cap": f"{self.lambda_cap:.15g}",
            "n_basis": self.n_basis,
            "solver_version": self.solver_version,
        }, sort_keys=True)

    def filename(self) -> str:
        digest = hashlib.sha256(self.canonical().encode()).hexdigest()
        return f"radial-{digest[:32]}.json"


def _encode_modes(modes: list[RadialMode]) -> dict:
    prob = modes[0].problem
    return {
        "geometry": prob.gp.as_dict(),
        "m": prob.m, "l": prob.l, "lambda_cap": prob.lambda_cap,
        "nu_minus": prob.nu_minus, "nu_plus": prob.nu_plus,
        "modes": [{
            "k": md.k, "ell": md.ell,
            "coeffs": list(md.coeffs),
            "grid_norm_residual": md.grid_norm_residual,
        } for md in modes],
    }


def _decode_modes(payload: dict) -> list[RadialMode]:
    gp = GeometryParams(**payload["geometry"])
    prob = RadialProblem(gp=gp, m=payload["m"], l=payload["l"],
                         lambda_cap=payload["lambda_cap"],
                         nu_minus=payload["nu_minus"],
                         nu_plus=payload["nu_plus"])
    return [RadialMode(problem=prob, k=md["k"], ell=md["ell"],
                       coeffs=np.array(md["coeffs"]),
                       grid_norm_residual=md["grid_norm_residual"])
            for md in payload["modes"]]


def _payload_checksum(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode()).hexdigest()


def cache_get_or_solve(key: CacheKey, solve, cache_dir: str,
                       min_modes: int = 1) -> list[RadialMode]:
    """Cached eigenpairs for `key`, else solve(), write atomically, return.

    `solve` is only invoked on a miss.  Entries holding fewer than
    min_modes eigenpairs count as misses (the excitation count is not
    part of the key).
    """
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, key.filename())
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                entry = json.load(fh)
            if entry.get("key") != key.canonical():
                raise CacheCorrupt("key mismatch")
            if entry.get("checksum") != _payload_checksum(entry["payload"]):
                raise CacheCorrupt("checksum mismatch")
            modes = _decode_modes(entry["payload"])
            if len(modes) >= min_modes:
                return modes
        except (CacheCorrupt, KeyError, TypeError, ValueError,
                json.JSONDecodeError) as exc:
            warnings.warn(f"cache entry {path} unusable ({exc}); re-solving",
                          stacklevel=2)
    modes = solve()
    payload = _encode_modes(modes)
    entry = {"key": key.canonical(),
             "checksum": _payload_checksum(payload),
             "payload": payload}
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(entry, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return modes
