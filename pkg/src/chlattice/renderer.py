"""Pattern synthesis and rasterization.

Stationary solutions are carried by the critical shell only: each complex
pair contributes 2*(a*cos(k.x) - a'*sin(k.x)) and the even (cosine) case
contributes y*cos(k.x) per pair.  Rasters are produced by direct evaluation
of the truncated Fourier sum on a uniform grid over a tiled fundamental cell,
which is exact at every sample point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import IoFailure, UnderResolved
from .lattice import CriticalSet, DualLattice
from .simulator import SpectralField

ROLL = "roll"
SQUARE = "square"
HEXAGON = "hexagon"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class RasterSpec:
    width: int = 512
    height: int = 512
    tiles: tuple[int, int] = (1, 1)


@dataclass
class FieldRaster:
    width: int
    height: int
    tiles: tuple[int, int]
    values: np.ndarray
    vmin: float
    vmax: float


def synthesize_stationary(eq, cs: CriticalSet, phases=None,
                          even: bool | None = None) -> SpectralField:
    """Spectral field of a reduced-system equilibrium.

    ``eq`` may be an Equilibrium or a bare coordinate sequence (one radius or
    cosine amplitude per critical pair); ``phases`` rotates each complex pair
    along its circle of steady states.
    """
    coords = getattr(eq, "coordinates", eq)
    coords = [float(c) for c in coords]
    n_pairs = len(cs.critical_indices)
    if len(coords) == 1 and n_pairs == 1:
        coords = coords
    if len(coords) != n_pairs:
        raise ValueError(
            f"{n_pairs} critical pairs but {len(coords)} coordinates")
    if even is None:
        even = getattr(eq, "pattern", "") in ("hexagon", "rectangle") or False
    if phases is None:
        phases = [0.0] * n_pairs
    if len(phases) != n_pairs:
        raise ValueError("one phase per critical pair required")

    N = cs.max_index
    modes = {}
    for rep, r, th in zip(cs.critical_indices, coords, phases):
        key = (int(rep[0]), int(rep[1]))
        if even:
            # u += y * cos(k.x): half the amplitude on each of +/- k
            modes[key] = 0.5 * r * complex(math.cos(th), math.sin(th))
        else:
            modes[key] = r * complex(math.cos(th), math.sin(th))
    return SpectralField.from_modes(N, modes)


def rasterize(field: SpectralField, dual: DualLattice,
              spec: RasterSpec = RasterSpec()) -> FieldRaster:
    """Evaluate the truncated Fourier sum on a uniform grid over
    ``tiles`` copies of the fundamental cell."""
    N = field.N
    nz = np.argwhere(np.abs(field.z) > 0)
    if nz.size == 0:
        max_n1 = max_n2 = 0
    else:
        max_n1 = int(np.max(np.abs(nz[:, 0] - N)))
        max_n2 = int(np.max(np.abs(nz[:, 1] - N)))
    t1, t2 = spec.tiles
    if spec.width <= 2 * max_n1 * t1 or spec.height <= 2 * max_n2 * t2:
        raise UnderResolved(
            f"raster {spec.width}x{spec.height} below the Nyquist bound of "
            f"mode ({max_n1},{max_n2}) over {t1}x{t2} cells")

    s1 = np.arange(spec.width) / spec.width * t1
    s2 = np.arange(spec.height) / spec.height * t2
    n = np.arange(-N, N + 1)
    A = np.exp(2j * np.pi * np.outer(s1, n))
    B = np.exp(2j * np.pi * np.outer(s2, n))
    values = (A @ field.z @ B.T).real
    return FieldRaster(
        width=spec.width, height=spec.height, tiles=spec.tiles,
        values=values,
        vmin=float(values.min()), vmax=float(values.max()),
    )


def lattice_vectors(dual: DualLattice) -> tuple[np.ndarray, np.ndarray]:
    """Physical spanning vectors recovered from the dual basis."""
    K = np.column_stack([dual.k1, dual.k2])
    L = 2.0 * np.pi * np.linalg.inv(K).T
    return L[:, 0], L[:, 1]


def find_peaks(raster: FieldRaster) -> np.ndarray:
    """Dominant-extremum positions as fractional (s1, s2) cell coordinates.

    Works on -values when the minima are deeper than the maxima are tall
    (spot patterns with a negative amplitude).  Local maxima are taken with
    ties allowed (symmetric extrema can land exactly between pixels) and
    plateau duplicates are merged by proximity.
    """
    v = raster.values
    mean = float(v.mean())
    if raster.vmax - mean < mean - raster.vmin:
        v = -v
    vmin, vmax = float(v.min()), float(v.max())
    level = 0.5 * (vmin + vmax)
    is_peak = v > level
    strict = np.zeros_like(is_peak)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = np.roll(v, (di, dj), axis=(0, 1))
            is_peak &= v >= nb
            strict |= v > nb
    is_peak &= strict
    ii, jj = np.nonzero(is_peak)
    t1, t2 = raster.tiles
    s1 = ii / raster.width * t1
    s2 = jj / raster.height * t2
    pts = np.column_stack([s1, s2])
    # Merge plateau duplicates: points within a few pixels of an already
    # accepted point (periodic in the tiled domain) are the same extremum.
    merge = 3.0 * max(t1 / raster.width, t2 / raster.height)
    kept: list[np.ndarray] = []
    for p in pts:
        dup = False
        for kpt in kept:
            d = np.abs(p - kpt)
            d = np.minimum(d, np.array([t1, t2]) - d)
            if np.hypot(d[0], d[1]) < merge:
                dup = True
                break
        if not dup:
            kept.append(p)
    if not kept:
        return np.empty((0, 2))
    return np.vstack(kept)


def peak_lattice_angle(raster: FieldRaster, dual: DualLattice) -> float | None:
    """Angle (degrees) between the two shortest independent nearest-neighbor
    directions of the peak lattice, in cartesian coordinates."""
    peaks = find_peaks(raster)
    if len(peaks) < 3:
        return None
    l1, l2 = lattice_vectors(dual)
    t1, t2 = raster.tiles
    # Tile peaks periodically so every peak has its full neighbor shell.
    shifted = []
    for a in (-t1, 0, t1):
        for b in (-t2, 0, t2):
            shifted.append(peaks + np.array([a, b]))
    all_peaks = np.vstack(shifted)
    cart = all_peaks[:, :1] * l1 + all_peaks[:, 1:] * l2

    center_frac = np.array([t1 / 2.0, t2 / 2.0])
    center_cart = center_frac[0] * l1 + center_frac[1] * l2
    d_center = np.linalg.norm(cart - center_cart, axis=1)
    home = cart[np.argmin(d_center)]

    rel = cart - home
    dist = np.linalg.norm(rel, axis=1)
    order = np.argsort(dist)
    dist_sorted = dist[order]
    nonzero = dist_sorted > 1e-9 * max(np.linalg.norm(l1), np.linalg.norm(l2))
    if not nonzero.any():
        return None
    d_min = dist_sorted[nonzero][0]
    neighbors = rel[(dist > 0.5 * d_min) & (dist < 1.25 * d_min)]
    if len(neighbors) < 2:
        return None
    angles = np.degrees(np.arctan2(neighbors[:, 1], neighbors[:, 0]))
    angles = np.sort(np.mod(angles, 360.0))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 360.0]]))
    gaps = gaps[gaps > 1.0]
    if gaps.size == 0:
        return None
    return float(np.min(gaps))


def classify_pattern(raster: FieldRaster, dual: DualLattice) -> str:
    """Label a raster by its peak-lattice geometry."""
    peaks = find_peaks(raster)
    if len(peaks) < 3:
        return ROLL
    angle = peak_lattice_angle(raster, dual)
    if angle is None or angle > 150.0:
        # Ridge crests: only collinear neighbor directions.
        return ROLL
    if abs(angle - 90.0) < 5.0:
        return SQUARE
    if abs(angle - 60.0) < 5.0:
        return HEXAGON
    return UNKNOWN


def _normalize_bytes(raster: FieldRaster) -> np.ndarray:
    span = raster.vmax - raster.vmin
    if span <= 0:
        return np.full(raster.values.shape, 128, dtype=np.uint8)
    scaled = (raster.values - raster.vmin) / span * 255.0
    return np.clip(np.round(scaled), 0, 255).astype(np.uint8)


def export(raster: FieldRaster, path, fmt: str):
    """Write a raster as CSV (full precision), binary PGM, or PNG."""
    fmt = fmt.lower()
    try:
        if fmt == "csv":
            np.savetxt(path, raster.values, fmt="%.17g", delimiter=",")
        elif fmt == "pgm":
            data = _normalize_bytes(raster)
            with open(path, "wb") as fh:
                fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode())
                fh.write(data.tobytes())
        elif fmt == "png":
            from PIL import Image
            Image.fromarray(_normalize_bytes(raster), mode="L").save(path)
        else:
            raise ValueError(f"unknown export format {fmt}")
    except OSError as exc:
        raise IoFailure(f"failed to write {path}: {exc}") from exc


def save_field(field: SpectralField, dual: DualLattice, path):
    """CSV handoff format: header row with the dual basis, then one row of
    (n1, n2, Re z, Im z) per nonzero mode."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k1x", "k1y", "k2x", "k2y", "N"])
            w.writerow([repr(float(dual.k1[0])), repr(float(dual.k1[1])),
                        repr(float(dual.k2[0])), repr(float(dual.k2[1])),
                        field.N])
            w.writerow(["n1", "n2", "re", "im"])
            N = field.N
            for n1 in range(-N, N + 1):
                for n2 in range(-N, N + 1):
                    zv = field.z[n1 + N, n2 + N]
                    if zv != 0:
                        w.writerow([n1, n2, repr(float(zv.real)),
                                    repr(float(zv.imag))])
    except OSError as exc:
        raise IoFailure(f"failed to write {path}: {exc}") from exc


def load_field(path) -> tuple[SpectralField, DualLattice]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(f"failed to read {path}: {exc}") from exc
    header = rows[1]
    k1 = np.array([float(header[0]), float(header[1])])
    k2 = np.array([float(header[2]), float(header[3])])
    N = int(header[4])
    fld = SpectralField.zeros(N)
    for row in rows[3:]:
        n1, n2 = int(row[0]), int(row[1])
        fld.z[n1 + N, n2 + N] = complex(float(row[2]), float(row[3]))
    return fld, DualLattice(k1, k2)
