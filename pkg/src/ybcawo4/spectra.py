"""Optical transition catalogs, Gaussian-broadened absorption spectra,
magnetic-field sweep maps and EPR resonance-field searches.

Detunings are quoted in GHz relative to the optical center (the electronic
transition frequency with all hyperfine splittings removed); the zero-spin
isotope line sits at a configurable offset, 0 by default.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, spinham
from .constants import CONSTANTS
from .errors import ValidationError
from .params import Manifold, SpinSystemParams

GROUND_GROUP_OF_LEVEL = {1: 0, 2: 1, 3: 1, 4: 2}
EXCITED_GROUP_OF_LEVEL = {1: 0, 2: 0, 3: 1, 4: 2}
GROUND_GROUP_NAMES = ("1", "23", "4")
EXCITED_GROUP_NAMES = ("12", "3", "4")

DEFAULT_I0_FRACTION = 0.05  # zero-spin isotope weight as a fraction of the total


@dataclass(frozen=True)
class BranchingTable:
    """Relative optical weights between ground and excited level groups.

    Rows: ground groups (|1>, |2,3>, |4>); columns: excited groups
    (|1,2>, |3>, |4>).  Values are relative intensities in [0, 1].
    """

    weights: np.ndarray
    polarization: str | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3, 3):
            raise ValidationError("branching table must be 3x3")
        if np.any(w < 0) or np.any(w > 1):
            raise ValidationError("branching weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    def line_weight(self, ground_level: int, excited_level: int) -> float:
        return float(self.weights[GROUND_GROUP_OF_LEVEL[ground_level],
                                  EXCITED_GROUP_OF_LEVEL[excited_level]])


# Measured relative branching ratios of the tetragonal site, one table per
# polarization (sigma: E perp c, pi: E parallel c, alpha: k parallel c).
MEASURED_BRANCHING = {
    "sigma": BranchingTable(np.array([[0.3, 0.7, 0.0],
                                      [1.0, 0.3, 0.7],
                                      [0.7, 0.0, 0.3]]), "sigma"),
    "pi": BranchingTable(np.array([[1.0, 0.0, 0.0],
                                   [0.0, 1.0, 1.0],
                                   [1.0, 0.0, 0.0]]), "pi"),
    "alpha": BranchingTable(np.array([[1.0, 0.0, 0.0],
                                      [0.0, 1.0, 1.0],
                                      [1.0, 0.0, 0.0]]), "alpha"),
}


@dataclass(frozen=True)
class TransitionLine:
    ground_index: int
    excited_index: int
    detuning_ghz: float
    weight: float
    polarization: str | None = None
    isotope: str = "171Yb"

    def __post_init__(self):
        if self.weight < 0:
            raise ValidationError("line weight must be non-negative")
        upper = 4 if self.isotope == "171Yb" else 2
        if not (1 <= self.ground_index <= upper and 1 <= self.excited_index <= upper):
            raise ValidationError("level index out of range")


@dataclass(frozen=True)
class Spectrum:
    """Absorption trace on a uniform, strictly increasing detuning grid."""

    detuning_ghz: np.ndarray
    absorption: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.detuning_ghz, dtype=float)
        y = np.asarray(self.absorption, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValidationError("grid and absorption must be 1-d arrays of one length")
        if x.size < 2:
            raise ValidationError("spectrum needs at least two grid points")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValidationError("detuning grid must be uniform and increasing")
        if np.any(y < -1e-12):
            raise ValidationError("absorption must be non-negative")
        object.__setattr__(self, "detuning_ghz", x)
        object.__setattr__(self, "absorption", y)

    def area(self) -> float:
        return float(np.trapezoid(self.absorption, self.detuning_ghz))


def calibrate_to_integrated_absorption(spectrum: Spectrum,
                                       alpha_integral_cm1_ghz: float) -> Spectrum:
    """Rescale a dimensionless trace so its area matches a measured
    integrated absorption coefficient (cm^-1 GHz); returns alpha in cm^-1."""
    area = spectrum.area()
    if area <= 0:
        raise ValidationError("cannot calibrate an empty spectrum")
    return Spectrum(spectrum.detuning_ghz,
                    spectrum.absorption * (alpha_integral_cm1_ghz / area))


@dataclass(frozen=True)
class SweepMap:
    """One spectrum per field value, all sharing a single detuning grid."""

    field_values_mt: np.ndarray
    axis: np.ndarray
    detuning_ghz: np.ndarray
    absorption: np.ndarray        # (n_fields, n_grid)

    def __post_init__(self):
        if self.absorption.shape != (self.field_values_mt.size, self.detuning_ghz.size):
            raise ValidationError("absorption block does not match the grid")

    def spectrum(self, index: int) -> Spectrum:
        return Spectrum(self.detuning_ghz, self.absorption[index])


def _effective_g(g, direction):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return float(np.sqrt((g.parallel * d[2]) ** 2
                         + g.perpendicular**2 * (d[0] ** 2 + d[1] ** 2)))


def zero_spin_lines(params: SpinSystemParams, b_mt, offset_ghz: float = 0.0,
                    total_weight: float = 1.0) -> list[TransitionLine]:
    """Optical lines of the I=0 isotopes: pure electron Zeeman doublets."""
    b = np.asarray(b_mt, dtype=float)
    norm = np.linalg.norm(b)
    lines = []
    if norm == 0.0:
        return [TransitionLine(1, 1, offset_ghz, total_weight, isotope="I0")]
    direction = b / norm
    b_t = norm * 1e-3
    split_g = _effective_g(params.g_ground, direction) * CONSTANTS.mu_b_ghz_per_t * b_t
    split_e = _effective_g(params.g_excited, direction) * CONSTANTS.mu_b_ghz_per_t * b_t
    e_g = (-split_g / 2.0, split_g / 2.0)
    e_e = (-split_e / 2.0, split_e / 2.0)
    for i in (1, 2):
        for j in (1, 2):
            lines.append(TransitionLine(i, j, offset_ghz + e_e[j - 1] - e_g[i - 1],
                                        total_weight / 4.0, isotope="I0"))
    return lines


def transition_catalog(params: SpinSystemParams, b_mt=(0.0, 0.0, 0.0),
                       weights: BranchingTable | str | None = None,
                       include_zero_spin: bool = True,
                       zero_spin_offset_ghz: float = 0.0,
                       zero_spin_fraction: float = DEFAULT_I0_FRACTION,
                       include_nuclear_zeeman: bool = True) -> list[TransitionLine]:
    """All optical lines at one field: 16 hyperfine lines plus 4 zero-spin ones.

    weights: None for equal line strengths, a BranchingTable, or one of the
    measured-polarization names ("sigma", "pi", "alpha").
    """
    if isinstance(weights, str):
        try:
            weights = MEASURED_BRANCHING[weights]
        except KeyError:
            raise ValidationError(f"unknown branching table {weights!r}") from None
    e_g = spinham.eigensystem(params, Manifold.GROUND, b_mt,
                              include_nuclear_zeeman).energies
    e_e = spinham.eigensystem(params, Manifold.EXCITED, b_mt,
                              include_nuclear_zeeman).energies
    pol = weights.polarization if weights is not None else None
    lines = []
    total = 0.0
    for i in range(1, 5):
        for j in range(1, 5):
            w = weights.line_weight(i, j) if weights is not None else 1.0
            total += w
            lines.append(TransitionLine(i, j, float(e_e[j - 1] - e_g[i - 1]), w, pol))
    if include_zero_spin:
        lines.extend(zero_spin_lines(params, b_mt, zero_spin_offset_ghz,
                                     zero_spin_fraction * total))
    return lines


def synthesize_spectrum(lines, fwhm_mhz: float, grid) -> Spectrum:
    """Sum of unit-area Gaussians of common FWHM, one per line, times weights.

    grid: (min_ghz, max_ghz, points) or an explicit uniform array.
    """
    if fwhm_mhz <= 0:
        raise ValidationError("fwhm must be positive")
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, n = grid
        if n < 2 or not hi > lo:
            raise ValidationError("grid must span a positive range with >= 2 points")
        x = np.linspace(lo, hi, int(n))
    else:
        x = np.asarray(grid, dtype=float)
        if x.size < 2:
            raise ValidationError("grid must have at least two points")
    centers = np.array([ln.detuning_ghz for ln in lines], dtype=float)
    weights = np.array([ln.weight for ln in lines], dtype=float)
    if centers.size == 0:
        return Spectrum(x, np.zeros_like(x))
    y = _kernels.gaussian_profile(x, centers, weights, fwhm_mhz * 1e-3)
    return Spectrum(x, y)


@dataclass(frozen=True)
class LineCluster:
    label: str
    center_ghz: float
    weight: float
    lines: tuple[TransitionLine, ...]


def label_line_clusters(lines, resolution_ghz: float) -> list[LineCluster]:
    """Merge lines closer than the resolution and letter them by detuning.

    Zero-weight lines are dropped; letters run A, B, C ... with ascending
    detuning, the convention used for the absorption peak names.
    """
    visible = sorted((ln for ln in lines if ln.weight > 0),
                     key=lambda ln: ln.detuning_ghz)
    clusters: list[list[TransitionLine]] = []
    for ln in visible:
        if clusters and ln.detuning_ghz - clusters[-1][-1].detuning_ghz <= resolution_ghz:
            clusters[-1].append(ln)
        else:
            clusters.append([ln])
    out = []
    for k, group in enumerate(clusters):
        weight = sum(ln.weight for ln in group)
        center = sum(ln.weight * ln.detuning_ghz for ln in group) / weight
        label = string.ascii_uppercase[k] if k < 26 else f"Z{k}"
        out.append(LineCluster(label, center, weight, tuple(group)))
    return out


def _mixed_weight_table(params, b_mt, table: BranchingTable,
                        include_nuclear_zeeman: bool) -> np.ndarray:
    """Project the zero-field branching weights through the field-mixed states.

    Incoherent approximation: w_ij(B) = sum_kl |<i(B)|k(0)>|^2 |<j(B)|l(0)>|^2
    w_kl(0), evaluated per individual level.
    """
    eg0 = spinham.eigensystem(params, Manifold.GROUND, (0, 0, 0),
                              include_nuclear_zeeman)
    ee0 = spinham.eigensystem(params, Manifold.EXCITED, (0, 0, 0),
                              include_nuclear_zeeman)
    eg = spinham.eigensystem(params, Manifold.GROUND, b_mt, include_nuclear_zeeman)
    ee = spinham.eigensystem(params, Manifold.EXCITED, b_mt, include_nuclear_zeeman)
    og = np.abs(eg.states.conj().T @ eg0.states) ** 2   # [i(B), k(0)]
    oe = np.abs(ee.states.conj().T @ ee0.states) ** 2
    w0 = np.empty((4, 4))
    for k in range(4):
        for l in range(4):
            w0[k, l] = table.line_weight(k + 1, l + 1)
    return og @ w0 @ oe.T


def field_sweep_map(params: SpinSystemParams, axis, field_values_mt, grid,
                    weights: BranchingTable | str | None = None,
                    mixed_weights: bool = False,
                    fwhm_171_mhz: float = 136.0, fwhm_i0_mhz: float = 153.0,
                    zero_spin_fraction: float = DEFAULT_I0_FRACTION,
                    include_nuclear_zeeman: bool = True) -> SweepMap:
    """Spectra over a field sweep along a fixed axis, on a common grid.

    With mixed_weights the zero-field branching weights follow the
    field-induced state mixing; otherwise they are applied as-is at every
    field (with weights=None all lines have equal strength, the convention
    used for simulated sweep overlays).
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    if np.isscalar(field_values_mt):
        raise ValidationError("field_values_mt must be a sequence")
    fields = np.asarray(field_values_mt, dtype=float)
    if fields.size < 2:
        raise ValidationError("a sweep needs at least two field values")
    if isinstance(grid, tuple):
        lo, hi, n = grid
        x = np.linspace(lo, hi, int(n))
    else:
        x = np.asarray(grid, dtype=float)
    if isinstance(weights, str):
        weights = MEASURED_BRANCHING[weights]

    block = np.empty((fields.size, x.size))
    for k, b in enumerate(fields):
        b_vec = b * axis
        if mixed_weights and weights is not None:
            w = _mixed_weight_table(params, b_vec, weights, include_nuclear_zeeman)
            lines = transition_catalog(params, b_vec, None, include_zero_spin=False,
                                       include_nuclear_zeeman=include_nuclear_zeeman)
            lines = [TransitionLine(ln.ground_index, ln.excited_index,
                                    ln.detuning_ghz,
                                    float(w[ln.ground_index - 1, ln.excited_index - 1]),
                                    weights.polarization)
                     for ln in lines]
            total = sum(ln.weight for ln in lines)
            lines += zero_spin_lines(params, b_vec, 0.0, zero_spin_fraction * total)
        else:
            lines = transition_catalog(params, b_vec, weights,
                                       zero_spin_fraction=zero_spin_fraction,
                                       include_nuclear_zeeman=include_nuclear_zeeman)
        yb = [ln for ln in lines if ln.isotope == "171Yb"]
        i0 = [ln for ln in lines if ln.isotope == "I0"]
        y = synthesize_spectrum(yb, fwhm_171_mhz, x).absorption
        if i0:
            y = y + synthesize_spectrum(i0, fwhm_i0_mhz, x).absorption
        block[k] = y
    return SweepMap(fields, axis, x, block)


# --- EPR resonance-field search -----------------------------------------

@dataclass(frozen=True)
class EprResonance:
    field_mt: float
    pair: tuple[int, int]
    weight: float


def _direction_from_angles(theta_deg: float, phi_deg: float) -> np.ndarray:
    t, p = np.radians(theta_deg), np.radians(phi_deg)
    return np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])


def _perpendicular_dipole_weight(params, manifold, eig, pair, direction):
    """RMS ac-dipole magnitude over two orthogonal drive directions perp B."""
    ref = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(ref, direction)) > 0.99:
        ref = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(direction, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(direction, e1)
    i, j = pair
    total = 0.0
    for e_ac in (e1, e2):
        amp = spinham.transition_magnetic_dipole(eig.state(i), eig.state(j), e_ac,
                                                 params, manifold)
        total += abs(amp) ** 2
    return float(np.sqrt(total))


def epr_resonance_fields(params: SpinSystemParams, microwave_freq_ghz: float,
                         theta_deg: float, phi_deg: float = 0.0,
                         b_range_mt=(1.0, 1000.0), samples: int | None = None,
                         tol_mt: float = 1e-3,
                         manifold: Manifold = Manifold.GROUND) -> list[EprResonance]:
    """Fields where a level-pair splitting crosses the microwave frequency.

    Sign changes of (splitting - frequency) are bracketed on a dense field
    scan (2000 samples per decade by default) and refined by bisection to
    tol_mt.  Weights are ac magnetic dipole magnitudes perpendicular to the
    static field.  An empty list means no resonance in range.
    """
    lo, hi = float(b_range_mt[0]), float(b_range_mt[1])
    if not (hi > lo >= 0.0):
        raise ValidationError("field range must satisfy 0 <= low < high")
    if microwave_freq_ghz <= 0:
        raise ValidationError("microwave frequency must be positive")
    direction = _direction_from_angles(theta_deg, phi_deg)
    if samples is None:
        decades = np.log10(hi / max(lo, hi * 1e-3))
        samples = int(2000 * max(1.0, decades))
    scan = np.linspace(lo, hi, samples)
    energies = spinham.manifold_energies(params, manifold,
                                         scan[:, None] * direction[None, :])

    def gap(i, j, b_mt):
        e = spinham.manifold_energies(params, manifold, [b_mt * direction])[0]
        return (e[j] - e[i]) - microwave_freq_ghz

    found = []
    for i in range(4):
        for j in range(i + 1, 4):
            g = (energies[:, j] - energies[:, i]) - microwave_freq_ghz
            crossings = np.nonzero((np.sign(g[:-1]) * np.sign(g[1:]) < 0)
                                   | (g[:-1] == 0.0))[0]
            pair_fields = []
            for k in crossings:
                a, b = scan[k], scan[k + 1]
                fa = g[k]
                while b - a > tol_mt:
                    mid = 0.5 * (a + b)
                    fm = gap(i, j, mid)
                    if fa * fm <= 0:
                        b = mid
                    else:
                        a, fa = mid, fm
                b_res = 0.5 * (a + b)
                if pair_fields and abs(b_res - pair_fields[-1]) < 2 * tol_mt:
                    continue  # the same root detected from both sides of a node
                pair_fields.append(b_res)
                eig = spinham.eigensystem(params, manifold, b_res * direction)
                weight = _perpendicular_dipole_weight(params, manifold, eig,
                                                      (i + 1, j + 1), direction)
                found.append(EprResonance(b_res, (i + 1, j + 1), weight))
    return sorted(found, key=lambda r: r.field_mt)


def angular_rosette(params: SpinSystemParams, plane: str, angles_deg,
                    microwave_freq_ghz: float, b_range_mt=(1.0, 1000.0),
                    **kwargs) -> list[tuple[float, list[EprResonance]]]:
    """EPR resonance fields versus rotation angle in the c-a or a-b plane.

    In the c-a plane the angle is measured from the c axis; in the a-b
    plane from the a axis (where the uniaxial model is angle-independent).
    """
    angles = np.asarray(angles_deg, dtype=float)
    if angles.size < 2:
        raise ValidationError("need at least two angles")
    out = []
    for angle in angles:
        if plane == "c-a":
            theta, phi = angle, 0.0
        elif plane == "a-b":
            theta, phi = 90.0, angle
        else:
            raise ValidationError("plane must be 'c-a' or 'a-b'")
        out.append((float(angle),
                    epr_resonance_fields(params, microwave_freq_ghz, theta, phi,
                                         b_range_mt, **kwargs)))
    return out
