"""On-disk formats: points as CSV or NDTV binary, certificates as text.

Points, CSV      one point per line, coordinates as decimal text separated
                 by commas, printed with 17 significant digits (lossless
                 for float64).
Points, binary   magic ``NDTV``, version u32, n u64, d u64, then n*d
                 little-endian float64 values; bit-exact round trip.
Certificate      a line-oriented key/value document (schema below), all
                 floats printed with 17 significant digits::

                     NDTV-CERT 1
                     algo: random | fast | det
                     seed: <int> | none
                     n: <int>
                     d: <int>
                     eps: <float>
                     radius_basis: avg_price | diameter | diameter_bound
                     rounds: <int>
                     bad_count: <int>
                     claimed_max_group_size: <int>
                     claimed_min_groups: <int>
                     ball_radius: <float>
                     ball_center: <d floats>
                     num_groups: <int>
                     group: <indices>          # repeated num_groups times,
                     witness: <indices> / <weights>   # alternating with group

Witness points are not stored; verifiers recompute them from the support
and weights against the points file.  Indices are 0-based.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import Ball, HullWitness, PointSet
from .tverberg import TverbergCertificate

__all__ = [
    "ParseError",
    "MAGIC",
    "BINARY_VERSION",
    "CERT_HEADER",
    "format_float",
    "save_points",
    "load_points",
    "save_certificate",
    "load_certificate",
]

MAGIC = b"NDTV"
BINARY_VERSION = 1
CERT_HEADER = "NDTV-CERT 1"


class ParseError(Exception):
    """A file does not conform to its documented format."""


def format_float(x: float) -> str:
    """17 significant digits: enough to reproduce any float64 exactly."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


def save_points(path, points, fmt: str = "csv") -> None:
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    if fmt == "csv":
        with open(path, "w") as fh:
            for row in pts:
                fh.write(",".join(format_float(v) for v in row))
                fh.write("\n")
    elif fmt == "bin":
        n, d = pts.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sIQQ", MAGIC, BINARY_VERSION, n, d))
            fh.write(np.ascontiguousarray(pts, dtype="<f8").tobytes())
    else:
        raise ParseError(f"unknown points format {fmt!r} (expected 'csv' or 'bin')")


def _load_points_csv(path) -> PointSet:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(f"{path}: line {lineno} has {len(parts)} fields, expected {width}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no points found")
    return PointSet(np.array(rows, dtype=np.float64))


def _load_points_bin(path) -> PointSet:
    with open(path, "rb") as fh:
        header = fh.read(24)
        if len(header) != 24:
            raise ParseError(f"{path}: truncated header")
        magic, version, n, d = struct.unpack("<4sIQQ", header)
        if magic != MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}")
        if version != BINARY_VERSION:
            raise ParseError(f"{path}: unsupported version {version}")
        raw = fh.read()
    data = np.frombuffer(raw, dtype="<f8")
    if data.size != n * d:
        raise ParseError(f"{path}: expected {n * d} values, found {data.size}")
    return PointSet(data.reshape(n, d))


def load_points(path) -> PointSet:
    """Load a points file, sniffing binary vs CSV by the magic bytes."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if head == MAGIC:
        return _load_points_bin(path)
    return _load_points_csv(path)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def save_certificate(path, cert: TverbergCertificate) -> None:
    lines = [CERT_HEADER]
    lines.append(f"algo: {cert.algo}")
    lines.append(f"seed: {'none' if cert.seed is None else cert.seed}")
    lines.append(f"n: {cert.n}")
    lines.append(f"d: {cert.d}")
    lines.append(f"eps: {format_float(cert.eps)}")
    lines.append(f"radius_basis: {cert.radius_basis}")
    lines.append(f"rounds: {cert.rounds}")
    lines.append(f"bad_count: {cert.bad_count}")
    lines.append(f"claimed_max_group_size: {cert.claimed_max_group_size}")
    lines.append(f"claimed_min_groups: {cert.claimed_min_groups}")
    lines.append(f"ball_radius: {format_float(cert.ball.radius)}")
    lines.append("ball_center: " + " ".join(format_float(v) for v in cert.ball.center))
    lines.append(f"num_groups: {len(cert.groups)}")
    for group, wit in zip(cert.groups, cert.witnesses):
        lines.append("group: " + " ".join(str(int(i)) for i in group))
        lines.append(
            "witness: "
            + " ".join(str(int(i)) for i in wit.support)
            + " / "
            + " ".join(format_float(w) for w in wit.weights)
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _expect(line: str, key: str, path) -> str:
    prefix = key + ":"
    if not line.startswith(prefix):
        raise ParseError(f"{path}: expected '{key}:', got {line[:60]!r}")
    return line[len(prefix) :].strip()


def load_certificate(path) -> TverbergCertificate:
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip()]
    if not lines or lines[0].strip() != CERT_HEADER:
        raise ParseError(f"{path}: missing '{CERT_HEADER}' header")
    try:
        it = iter(lines[1:])
        algo = _expect(next(it), "algo", path)
        seed_s = _expect(next(it), "seed", path)
        seed = None if seed_s == "none" else int(seed_s)
        n = int(_expect(next(it), "n", path))
        d = int(_expect(next(it), "d", path))
        eps = float(_expect(next(it), "eps", path))
        basis = _expect(next(it), "radius_basis", path)
        rounds = int(_expect(next(it), "rounds", path))
        bad_count = int(_expect(next(it), "bad_count", path))
        cap = int(_expect(next(it), "claimed_max_group_size", path))
        kmin = int(_expect(next(it), "claimed_min_groups", path))
        radius = float(_expect(next(it), "ball_radius", path))
        center = np.array([float(v) for v in _expect(next(it), "ball_center", path).split()])
        num_groups = int(_expect(next(it), "num_groups", path))
        groups, witnesses = [], []
        for _ in range(num_groups):
            gline = _expect(next(it), "group", path)
            groups.append(np.array([int(v) for v in gline.split()], dtype=np.int64))
            wline = _expect(next(it), "witness", path)
            if "/" not in wline:
                raise ParseError(f"{path}: witness line missing '/' separator")
            sup_s, wts_s = wline.split("/", 1)
            support = np.array([int(v) for v in sup_s.split()], dtype=np.int64)
            weights = np.array([float(v) for v in wts_s.split()])
            witnesses.append(HullWitness(support=support, weights=weights, point=None))
    except StopIteration:
        raise ParseError(f"{path}: truncated certificate") from None
    except (ValueError, struct.error) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if len(center) != d:
        raise ParseError(f"{path}: ball center has {len(center)} coordinates, expected d={d}")
    return TverbergCertificate(
        groups=groups,
        ball=Ball(center=center, radius=radius),
        witnesses=witnesses,
        radius_basis=basis,
        eps=eps,
        algo=algo,
        claimed_max_group_size=cap,
        claimed_min_groups=kmin,
        n=n,
        d=d,
        rounds=rounds,
        bad_count=bad_count,
        seed=seed,
    )
