"""Effective spin-1/2 Hamiltonian of one manifold and its exact eigensystem.

The Hamiltonian (energies in GHz, E/h convention) is

    H = A_perp (Sx Ix + Sy Iy) + A_par Sz Iz
        + (mu_B/h) (g_perp (Bx Sx + By Sy) + g_par Bz Sz)
        - (mu_n/h) g_n B . I

in the product basis (up-Up, up-Dn, dn-Up, dn-Dn); electron arrow first,
nuclear arrow second, z along the crystal c axis.  Fields are mT at the
API boundary and tesla internally.

Conventions fixed here and relied on elsewhere:
  * eigenvalues ascending; within a degenerate pair the basis diagonalizes
    Sz (then Iz), so the zero-field doublet comes out as up-Up before dn-Dn;
  * eigenvector phase: largest-magnitude component real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import CONSTANTS
from .errors import ValidationError
from .params import Manifold, SpinSystemParams, UniaxialTensor

BASIS_LABELS = ("up-Up", "up-Dn", "dn-Up", "dn-Dn")

_DEGENERACY_TOL_GHZ = 1e-7


def spin_half_operators():
    """The three spin-1/2 operators as 2x2 complex matrices."""
    sx = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    sy = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
    sz = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
    return sx, sy, sz


def product_operators():
    """Electron (S) and nuclear (I) vector operators on the 4-dim product space."""
    ops = spin_half_operators()
    eye = np.eye(2, dtype=complex)
    s_ops = tuple(np.kron(o, eye) for o in ops)
    i_ops = tuple(np.kron(eye, o) for o in ops)
    return s_ops, i_ops


def _zeeman_factors(params: SpinSystemParams, manifold: Manifold,
                    include_nuclear_zeeman: bool = True):
    g = params.g(manifold)
    ze_par = g.parallel * CONSTANTS.mu_b_ghz_per_t
    ze_perp = g.perpendicular * CONSTANTS.mu_b_ghz_per_t
    zn = params.g_n * CONSTANTS.mu_n_ghz_per_t if include_nuclear_zeeman else 0.0
    return ze_par, ze_perp, zn


def build_hamiltonian(params: SpinSystemParams, manifold: Manifold, b_mt,
                      include_nuclear_zeeman: bool = True) -> np.ndarray:
    """4x4 Hermitian matrix in GHz for the given manifold and field (mT)."""
    b_t = np.asarray(b_mt, dtype=float) * 1e-3
    if b_t.shape != (3,):
        raise ValidationError("magnetic field must be a 3-vector")
    if not np.all(np.isfinite(b_t)):
        raise ValidationError("magnetic field components must be finite")
    a = params.a(manifold)
    ze_par, ze_perp, zn = _zeeman_factors(params, manifold, include_nuclear_zeeman)
    return _kernels.build_hamiltonians_numpy(
        a.parallel, a.perpendicular, ze_par, ze_perp, zn, b_t[None, :])[0]


def field_derivative_operator(params: SpinSystemParams, manifold: Manifold,
                              direction) -> np.ndarray:
    """dH/dB along a unit direction, in GHz/T (== MHz/mT)."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    ze_par, ze_perp, zn = _zeeman_factors(params, manifold)
    (sx, sy, sz), (ix, iy, iz) = product_operators()
    return (ze_perp * (d[0] * sx + d[1] * sy) + ze_par * d[2] * sz
            - zn * (d[0] * ix + d[1] * iy + d[2] * iz))


@dataclass(frozen=True)
class EigenSystem:
    """Energies (GHz, ascending) and eigenvector columns of one manifold."""

    energies: np.ndarray        # (4,)
    states: np.ndarray          # (4, 4); states[:, k] belongs to energies[k]
    field_mt: np.ndarray        # (3,)

    def state(self, index: int) -> np.ndarray:
        """Eigenvector for the 1-based level index."""
        return self.states[:, index - 1]

    def degenerate_pairs(self, tol_ghz: float = _DEGENERACY_TOL_GHZ):
        """1-based index pairs of levels degenerate within tol."""
        out = []
        for i in range(3):
            if self.energies[i + 1] - self.energies[i] < tol_ghz:
                out.append((i + 1, i + 2))
        return out


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    out = vec / phase
    # scrub the residual imaginary dust on the anchor component
    out[k] = out[k].real
    return out


def _resolve_degeneracies(energies: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Rotate each degenerate subspace onto the basis diagonalizing Sz, then Iz."""
    (_, _, sz), (_, _, iz) = product_operators()
    vecs = vectors.copy()
    i = 0
    while i < 4:
        j = i + 1
        while j < 4 and energies[j] - energies[i] < _DEGENERACY_TOL_GHZ:
            j += 1
        if j - i > 1:
            block = vecs[:, i:j]
            for op in (sz, iz):
                m = block.conj().T @ op @ block
                _, u = np.linalg.eigh((m + m.conj().T) / 2.0)
                block = block @ u[:, ::-1]  # descending expectation value
            vecs[:, i:j] = block
        i = j
    return vecs


def diagonalize(h: np.ndarray, field_mt=(0.0, 0.0, 0.0)) -> EigenSystem:
    """Exact eigensystem with the deterministic ordering/phase conventions."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ValidationError("expected a 4x4 matrix")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > 1e-9 * scale:
        raise ValidationError("matrix is not Hermitian within 1e-9 relative")
    energies, vectors = np.linalg.eigh(h)
    vectors = _resolve_degeneracies(energies, vectors)
    for k in range(4):
        vectors[:, k] = _fix_phase(vectors[:, k])
    return EigenSystem(energies=energies, states=vectors,
                       field_mt=np.asarray(field_mt, dtype=float))


def eigensystem(params: SpinSystemParams, manifold: Manifold, b_mt=(0.0, 0.0, 0.0),
                include_nuclear_zeeman: bool = True) -> EigenSystem:
    h = build_hamiltonian(params, manifold, b_mt, include_nuclear_zeeman)
    return diagonalize(h, field_mt=b_mt)


def manifold_energies(params: SpinSystemParams, manifold: Manifold, fields_mt,
                      include_nuclear_zeeman: bool = True) -> np.ndarray:
    """Ascending energies (n, 4) over a batch of fields; hot-kernel backed."""
    a = params.a(manifold)
    ze_par, ze_perp, zn = _zeeman_factors(params, manifold, include_nuclear_zeeman)
    fields_t = np.atleast_2d(np.asarray(fields_mt, dtype=float)) * 1e-3
    return _kernels.manifold_energies(a.parallel, a.perpendicular,
                                      ze_par, ze_perp, zn, fields_t)


@dataclass(frozen=True)
class LevelGroup:
    energy_ghz: float
    multiplicity: int
    label: str


def zero_field_levels(a: UniaxialTensor) -> list[LevelGroup]:
    """Analytic zero-field level groups of one manifold, ascending in energy.

    The flip-flop block splits into antisymmetric/symmetric combinations of
    up-Dn and dn-Up ("singlet-"/"singlet+"); up-Up and dn-Dn stay degenerate
    ("doublet").
    """
    if a.unit != "GHz":
        raise ValidationError("zero_field_levels expects the hyperfine tensor")
    ap, aq = a.parallel, a.perpendicular
    groups = [
        LevelGroup((-ap - 2.0 * aq) / 4.0, 1, "singlet-"),
        LevelGroup(ap / 4.0, 2, "doublet"),
        LevelGroup((-ap + 2.0 * aq) / 4.0, 1, "singlet+"),
    ]
    return sorted(groups, key=lambda g: g.energy_ghz)


def zero_field_splittings(a: UniaxialTensor) -> dict[str, float]:
    """Gaps between the three zero-field level groups, lowest group as origin."""
    groups = zero_field_levels(a)
    return {
        f"{groups[0].label}_to_{groups[1].label}": groups[1].energy_ghz - groups[0].energy_ghz,
        f"{groups[0].label}_to_{groups[2].label}": groups[2].energy_ghz - groups[0].energy_ghz,
    }


_SQ2 = 1.0 / np.sqrt(2.0)

# Zero-field eigenvectors in the product basis, keyed by the conventional
# level numbering of each manifold (states ordered lowest to highest energy
# for the tabulated parameter signs).
_GROUND_ZF = (
    ("(up-Dn - dn-Up)/sqrt2", np.array([0, _SQ2, -_SQ2, 0], dtype=complex)),
    ("up-Up", np.array([1, 0, 0, 0], dtype=complex)),
    ("dn-Dn", np.array([0, 0, 0, 1], dtype=complex)),
    ("(up-Dn + dn-Up)/sqrt2", np.array([0, _SQ2, _SQ2, 0], dtype=complex)),
)
_EXCITED_ZF = (
    ("up-Up", np.array([1, 0, 0, 0], dtype=complex)),
    ("dn-Dn", np.array([0, 0, 0, 1], dtype=complex)),
    ("(up-Dn + dn-Up)/sqrt2", np.array([0, _SQ2, _SQ2, 0], dtype=complex)),
    ("(up-Dn - dn-Up)/sqrt2", np.array([0, _SQ2, -_SQ2, 0], dtype=complex)),
)


def zero_field_states(manifold: Manifold) -> list[tuple[str, np.ndarray]]:
    """Labeled zero-field eigenstates |1>..|4> of the manifold.

    Note the conventional labels fix which of the two entangled combinations
    is called |3> vs |4> in the excited manifold; with a perpendicular
    hyperfine component of the opposite sign the two swap (all observables
    are invariant under that sign flip).
    """
    table = _GROUND_ZF if manifold is Manifold.GROUND else _EXCITED_ZF
    return [(label, vec.copy()) for label, vec in table]


_PRODUCT_STATES = tuple(np.eye(4, dtype=complex))


def high_field_states(manifold: Manifold, b_parallel_mt: float,
                      params: SpinSystemParams, warn: bool = True):
    """Product-state assignment in the strong-field limit along c.

    Returns [(basis label, basis vector), ...] for levels |1>..|4| ordered by
    the diagonal energy of each product state at the given field.  Warns when
    the electron Zeeman energy does not dominate the hyperfine coupling.
    """
    a = params.a(manifold)
    ze_par, _, _ = _zeeman_factors(params, manifold)
    b_t = b_parallel_mt * 1e-3
    if warn and abs(ze_par * b_t) < 10.0 * max(abs(a.parallel), abs(a.perpendicular)):
        import warnings
        warnings.warn("field is not deep in the high-field regime; product-state "
                      "labels may not match the exact eigenvectors", stacklevel=2)
    h = build_hamiltonian(params, manifold, (0.0, 0.0, b_parallel_mt))
    diag = np.real(np.diag(h))
    order = np.argsort(diag, kind="stable")
    return [(BASIS_LABELS[k], _PRODUCT_STATES[k].copy()) for k in order]


def first_order_sensitivity(state, direction, params: SpinSystemParams,
                            manifold: Manifold) -> float:
    """<i| dH/dB |i> along a unit direction, in MHz/mT."""
    v = np.asarray(state, dtype=complex)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValidationError("state must be normalized")
    op = field_derivative_operator(params, manifold, direction)
    return float(np.real(v.conj() @ op @ v))


def magnetic_dipole_operator(params: SpinSystemParams, manifold: Manifold,
                             bac_direction) -> np.ndarray:
    """-(g-weighted B_ac.S - (mu_n/mu_B) g_n B_ac.I) for a unit ac field.

    Matrix elements are transition dipole amplitudes in units of mu_B.
    """
    d = np.asarray(bac_direction, dtype=float)
    d = d / np.linalg.norm(d)
    g = params.g(manifold)
    (sx, sy, sz), (ix, iy, iz) = product_operators()
    nuclear = CONSTANTS.mu_n_over_mu_b * params.g_n
    return -(g.perpendicular * (d[0] * sx + d[1] * sy) + g.parallel * d[2] * sz
             - nuclear * (d[0] * ix + d[1] * iy + d[2] * iz))


def transition_magnetic_dipole(state_i, state_j, bac_direction,
                               params: SpinSystemParams, manifold: Manifold) -> complex:
    """Transition amplitude <i|op|j> of the ac magnetic dipole, in mu_B units."""
    vi = np.asarray(state_i, dtype=complex)
    vj = np.asarray(state_j, dtype=complex)
    if np.allclose(vi, vj):
        raise ValidationError("transition dipole needs two distinct states")
    op = magnetic_dipole_operator(params, manifold, bac_direction)
    return complex(vi.conj() @ op @ vj)


_AXES = (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))


def _sensitivities(params, manifold, eig: EigenSystem) -> np.ndarray:
    """(4, 3) array of per-level slopes along x, y, z in MHz/mT."""
    out = np.empty((4, 3))
    for a, axis in enumerate(_AXES):
        op = field_derivative_operator(params, manifold, axis)
        for k in range(4):
            v = eig.states[:, k]
            out[k, a] = np.real(v.conj() @ op @ v)
    return out


def find_clock_transitions(params: SpinSystemParams, b0_mt=(0.0, 0.0, 0.0),
                           pairs: str = "ground",
                           tol_mhz_per_mt: float = 1e-6):
    """Level pairs whose differential first-order field sensitivity vanishes.

    pairs: "ground" / "excited" for spin transitions inside one manifold,
    "optical" for (ground level, excited level) pairs.  A pair is flagged
    when the sensitivity difference is below tol along all three axes.
    """
    if pairs == "optical":
        eg = eigensystem(params, Manifold.GROUND, b0_mt)
        ee = eigensystem(params, Manifold.EXCITED, b0_mt)
        sg = _sensitivities(params, Manifold.GROUND, eg)
        se = _sensitivities(params, Manifold.EXCITED, ee)
        return [(i + 1, j + 1) for i in range(4) for j in range(4)
                if np.max(np.abs(sg[i] - se[j])) < tol_mhz_per_mt]
    manifold = Manifold.GROUND if pairs == "ground" else Manifold.EXCITED
    eig = eigensystem(params, manifold, b0_mt)
    s = _sensitivities(params, manifold, eig)
    return [(i + 1, j + 1) for i in range(4) for j in range(i + 1, 4)
            if np.max(np.abs(s[i] - s[j])) < tol_mhz_per_mt]
