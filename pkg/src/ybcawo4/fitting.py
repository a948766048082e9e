"""Damped least-squares engine and the concrete fit models: Gaussian lines,
exponential echo decays, spin-lattice recovery with a shared equilibrium
temperature, field-sweep g-tensor extraction, and photometric estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constants import (C_LIGHT_M_S, CONSTANTS, E_CHARGE_C, EPSILON0_F_M,
                        M_ELECTRON_KG)
from .errors import DomainError, ValidationError
from .params import SpinSystemParams
from .dynamics import boltzmann_populations


@dataclass
class FitResult:
    names: tuple
    values: np.ndarray
    uncertainties: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    cost_history: list = field(default_factory=list)
    flags: tuple = ()

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def uncertainty(self, name: str) -> float:
        return float(self.uncertainties[self.names.index(name)])

    def describe(self) -> str:
        lines = []
        for name, value, sigma in zip(self.names, self.values, self.uncertainties):
            lines.append(f"{name} = {value:.8g} +- {sigma:.3g}")
        lines.append(f"residual norm = {self.residual_norm:.6g}")
        lines.append(f"iterations = {self.iterations}")
        lines.append(f"converged = {self.converged}")
        for flag in self.flags:
            lines.append(f"flag: {flag}")
        return "\n".join(lines)


def _forward_jacobian(model, params, f0):
    n, p = f0.size, params.size
    jac = np.empty((n, p))
    for k in range(p):
        step = 1e-7 * max(abs(params[k]), 1e-3)
        shifted = params.copy()
        shifted[k] += step
        jac[:, k] = (model(shifted) - f0) / step
    return jac


def least_squares(model, data, initial, bounds=None, tol: float = 1e-10,
                  max_iter: int = 200, jacobian=None,
                  names: tuple | None = None) -> FitResult:
    """Levenberg-style damped least squares.

    model(params) returns the prediction compared against `data`; the
    residual is model(params) - data.  The damping parameter grows until a
    step reduces the cost, so accepted iterations are monotone in the
    residual norm.  Covariance comes from (J^T J)^-1 at the optimum scaled
    by the residual variance.
    """
    params = np.asarray(initial, dtype=float).copy()
    data = np.asarray(data, dtype=float)
    if bounds is not None:
        lo = np.asarray([b[0] for b in bounds], dtype=float)
        hi = np.asarray([b[1] for b in bounds], dtype=float)
        if np.any(params < lo) or np.any(params > hi):
            raise ValidationError("initial parameters violate the bounds")
    names = names or tuple(f"p{k}" for k in range(params.size))

    def evaluate(p):
        prediction = np.asarray(model(p), dtype=float)
        if not np.all(np.isfinite(prediction)):
            raise ValidationError("model returned non-finite values")
        return prediction - data

    residual = evaluate(params)
    cost = float(residual @ residual)
    history = [cost]
    lam = 1e-3
    converged = False
    flags = []
    iterations = 0
    singular = False
    for iterations in range(1, max_iter + 1):
        jac = (np.asarray(jacobian(params), dtype=float) if jacobian is not None
               else _forward_jacobian(lambda q: evaluate(q) + data, params,
                                      residual + data))
        gradient = jac.T @ residual
        if np.max(np.abs(gradient)) < tol * max(1.0, math.sqrt(cost)):
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1e-30
        stepped = False
        for _ in range(40):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), -gradient)
            except np.linalg.LinAlgError:
                singular = True
                break
            trial = params + delta
            if bounds is not None:
                trial = np.clip(trial, lo, hi)
            trial_residual = evaluate(trial)
            trial_cost = float(trial_residual @ trial_residual)
            if trial_cost <= cost:
                rel_drop = (cost - trial_cost) / max(cost, 1e-300)
                step_size = np.max(np.abs(trial - params)
                                   / np.maximum(np.abs(params), 1e-12))
                params, residual, cost = trial, trial_residual, trial_cost
                history.append(cost)
                lam = max(lam / 3.0, 1e-14)
                stepped = True
                if rel_drop < tol or step_size < tol:
                    converged = True
                break
            lam *= 10.0
            if lam > 1e14:
                break
        if singular or not stepped or converged:
            break

    if singular:
        flags.append("singular jacobian")
        converged = False

    jac = (np.asarray(jacobian(params), dtype=float) if jacobian is not None
           else _forward_jacobian(lambda q: evaluate(q) + data, params,
                                  residual + data))
    dof = max(data.size - params.size, 1)
    sigma_sq = cost / dof
    try:
        covariance = sigma_sq * np.linalg.inv(jac.T @ jac)
        uncertainties = np.sqrt(np.clip(np.diag(covariance), 0.0, np.inf))
    except np.linalg.LinAlgError:
        uncertainties = np.full(params.size, np.inf)
        flags.append("singular jacobian")
        converged = False
    return FitResult(tuple(names), params, uncertainties, math.sqrt(cost),
                     iterations, converged, history, tuple(flags))


# --- Gaussian line -------------------------------------------------------

def gaussian_profile(x, center, fwhm, amplitude, offset):
    """Peak-normalized Gaussian: amplitude is the height above the offset."""
    z = (x - center) / fwhm
    return offset + amplitude * np.exp(-4.0 * math.log(2.0) * z * z)


def gaussian_jacobian(x, center, fwhm, amplitude, offset):
    z = (x - center) / fwhm
    core = np.exp(-4.0 * math.log(2.0) * z * z)
    d_center = amplitude * core * 8.0 * math.log(2.0) * z / fwhm
    d_fwhm = amplitude * core * 8.0 * math.log(2.0) * z * z / fwhm
    d_amp = core
    d_off = np.ones_like(np.asarray(x, dtype=float))
    return np.column_stack([d_center, d_fwhm, d_amp, d_off])


def fit_gaussian_line(x, y) -> FitResult:
    """Fit center, FWHM, peak amplitude and offset to a single line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 5:
        raise ValidationError("need at least 5 points for a line fit")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("data must be finite")
    offset0 = float(np.median(np.concatenate([y[:3], y[-3:]])))
    amp0 = float(y.max() - offset0)
    center0 = float(x[np.argmax(y)])
    above = x[y > offset0 + amp0 / 2.0]
    fwhm0 = float(above.max() - above.min()) if above.size >= 2 else \
        (x[-1] - x[0]) / 4.0
    fwhm0 = max(fwhm0, (x[1] - x[0]) * 2)

    def model(p):
        return gaussian_profile(x, *p)

    def jac(p):
        return gaussian_jacobian(x, *p)

    result = least_squares(model, y, [center0, fwhm0, amp0, offset0],
                           jacobian=jac,
                           names=("center", "fwhm", "amplitude", "offset"))
    if abs(result["amplitude"]) < 3.0 * result.uncertainty("amplitude"):
        result.flags = result.flags + ("low-confidence amplitude",)
    return result


# --- echo decay ----------------------------------------------------------

def echo_decay_profile(tau, e0, t2):
    return e0 * np.exp(-2.0 * np.asarray(tau, dtype=float) / t2)


def echo_decay_jacobian(tau, e0, t2):
    tau = np.asarray(tau, dtype=float)
    core = np.exp(-2.0 * tau / t2)
    return np.column_stack([core, e0 * core * 2.0 * tau / t2**2])


def fit_echo_decay(tau_s, intensity, kind: str = "spin") -> FitResult:
    """Two-parameter fit of E(tau) = E0 exp(-2 tau / T2)."""
    if kind not in ("spin", "optical"):
        raise ValidationError("kind must be 'spin' or 'optical'")
    tau = np.asarray(tau_s, dtype=float)
    y = np.asarray(intensity, dtype=float)
    if tau.size < 4:
        raise ValidationError("need at least 4 delays")
    if np.any(tau < 0):
        raise ValidationError("delays must be non-negative")
    positive = y > 0
    if positive.sum() >= 2:
        slope, intercept = np.polyfit(tau[positive], np.log(y[positive]), 1)
    else:
        slope, intercept = -1.0, 0.0
    if slope >= 0:  # non-decaying data: flag and bail out with the raw guess
        result = least_squares(lambda p: echo_decay_profile(tau, *p), y,
                               [max(y.max(), 1e-12), tau.max() * 10 + 1.0],
                               names=("e0", "t2"))
        result.converged = False
        result.flags = result.flags + ("non-decaying data",)
        return result
    t2_0 = -2.0 / slope
    e0_0 = math.exp(intercept)

    result = least_squares(lambda p: echo_decay_profile(tau, *p), y,
                           [e0_0, t2_0],
                           bounds=[(0.0, np.inf), (1e-12, np.inf)],
                           jacobian=lambda p: echo_decay_jacobian(tau, *p),
                           names=("e0", "t2"))
    return result


# --- spin-lattice recovery ------------------------------------------------

def recovery_profiles(delays, params_vector, energies_ghz, degeneracies):
    """Stacked n_i(tau) curves with a shared equilibrium temperature.

    params_vector = (T_eq, n0_1, T_R1, n0_2, T_R2, n0_3, T_R3) over the
    level groups; equilibrium populations follow the Boltzmann weights of
    the group energies at T_eq.
    """
    t_eq = params_vector[0]
    eq = boltzmann_populations(energies_ghz, max(t_eq, 1e-6), degeneracies)
    delays = np.asarray(delays, dtype=float)
    out = []
    for k in range(3):
        n0 = params_vector[1 + 2 * k]
        t_r = max(params_vector[2 + 2 * k], 1e-9)
        out.append(eq[k] + (n0 - eq[k]) * np.exp(-delays / t_r))
    return np.concatenate(out)


def fit_slr_recovery(delays_s, populations, energies_ghz,
                     degeneracies=(1, 2, 1)) -> FitResult:
    """Simultaneous exponential recovery fits tied to one temperature.

    populations: (n_delays, 3) occupations of the level groups |1>, |2,3>,
    |4>.  Returns T_eq plus per-group initial populations and recovery
    times; flags groups whose recovery amplitude is too small to date.
    """
    delays = np.asarray(delays_s, dtype=float)
    pops = np.asarray(populations, dtype=float)
    if delays.size < 4:
        raise ValidationError("need at least 4 delays")
    if pops.shape != (delays.size, 3):
        raise ValidationError("populations must be (n_delays, 3)")
    if np.any(pops < 0) or np.any(pops > 1):
        raise ValidationError("populations must lie in [0, 1]")
    energies = np.asarray(energies_ghz, dtype=float)

    t_eq0 = 0.2
    guess = [t_eq0]
    t_r0 = max(delays.max() / 3.0, 1e-6)
    for k in range(3):
        guess.extend([float(pops[0, k]), t_r0])
    names = ("t_eq", "n0_1", "t_r_1", "n0_23", "t_r_23", "n0_4", "t_r_4")
    bounds = [(1e-3, 10.0)]
    for _ in range(3):
        bounds.extend([(0.0, 1.0), (1e-9, np.inf)])

    result = least_squares(
        lambda p: recovery_profiles(delays, p, energies, degeneracies),
        pops.T.reshape(-1), guess, bounds=bounds, names=names)

    eq = boltzmann_populations(energies, result["t_eq"], degeneracies)
    spread = pops.std(axis=0)
    for k, name in enumerate(("t_r_1", "t_r_23", "t_r_4")):
        amplitude = abs(result[f"n0_{('1', '23', '4')[k]}"] - eq[k])
        if amplitude < max(3.0 * spread[k] / math.sqrt(delays.size), 1e-4):
            result.flags = result.flags + (f"{name} unidentifiable",)
    return result


# --- field-sweep g-tensor fit ---------------------------------------------

@dataclass(frozen=True)
class SweepData:
    """One measured (or synthesized) current sweep: spectra vs coil current."""

    currents_a: np.ndarray
    axis: np.ndarray              # unit vector of the field direction
    detuning_ghz: np.ndarray
    absorption: np.ndarray        # (n_currents, n_grid)

    def __post_init__(self):
        if self.absorption.shape != (self.currents_a.size, self.detuning_ghz.size):
            raise ValidationError("absorption block does not match grid/currents")


@dataclass(frozen=True)
class FieldSweepFitSpec:
    """Free parameters of the sweep fit and their starting values.

    Free: the excited-state g components, one current-to-field scale per
    sweep (G/A), the two isotope amplitudes, and a global frequency offset.
    The ground tensors and the two Gaussian widths stay fixed.
    """

    g_e_parallel: float = -1.451
    g_e_perpendicular: float = 1.361
    scales_g_per_a: tuple = (166.20,)
    amplitude_171: float = 1.0
    amplitude_i0: float = 1.0
    offset_ghz: float = 0.0
    fwhm_171_mhz: float = 136.0
    fwhm_i0_mhz: float = 153.0


def _sweep_prediction(sweeps, params: SpinSystemParams, spec: FieldSweepFitSpec,
                      p_vector) -> np.ndarray:
    """Stacked model spectra for all sweeps; equal line strengths.

    The spin Hamiltonian here drops the nuclear Zeeman term, the convention
    used when fitting field sweeps.
    """
    n_sweeps = len(sweeps)
    g_par_e, g_perp_e = p_vector[0], p_vector[1]
    scales = p_vector[2:2 + n_sweeps]
    amp171, amp_i0, offset = p_vector[2 + n_sweeps:5 + n_sweeps]
    a_g = params.a_ground
    a_e = params.a_excited
    mu = CONSTANTS.mu_b_ghz_per_t
    blocks = []
    for sweep, scale in zip(sweeps, scales):
        fields_t = (0.1 * scale * sweep.currents_a)[:, None] * 1e-3 \
            * sweep.axis[None, :]
        e_g = _kernels.manifold_energies(
            a_g.parallel, a_g.perpendicular,
            params.g_ground.parallel * mu, params.g_ground.perpendicular * mu,
            0.0, fields_t)
        e_e = _kernels.manifold_energies(
            a_e.parallel, a_e.perpendicular, g_par_e * mu, g_perp_e * mu,
            0.0, fields_t)
        d = sweep.axis
        g_eff_g = math.sqrt((params.g_ground.parallel * d[2]) ** 2
                            + params.g_ground.perpendicular**2 * (d[0]**2 + d[1]**2))
        g_eff_e = math.sqrt((g_par_e * d[2]) ** 2
                            + abs(g_perp_e) ** 2 * (d[0]**2 + d[1]**2))
        b_mags_t = 0.1 * scale * sweep.currents_a * 1e-3
        for k in range(sweep.currents_a.size):
            detunings = (e_e[k][None, :] - e_g[k][:, None]).ravel() + offset
            weights = np.full(16, amp171)
            split_g = g_eff_g * mu * b_mags_t[k]
            split_e = g_eff_e * mu * b_mags_t[k]
            i0_centers = np.array([(se - sg) / 2.0 + offset
                                   for sg in (-split_g, split_g)
                                   for se in (-split_e, split_e)])
            y = _kernels.gaussian_profile(sweep.detuning_ghz, detunings, weights,
                                          spec.fwhm_171_mhz * 1e-3)
            y = y + _kernels.gaussian_profile(sweep.detuning_ghz, i0_centers,
                                              np.full(4, amp_i0 / 4.0),
                                              spec.fwhm_i0_mhz * 1e-3)
            blocks.append(y)
    return np.concatenate(blocks)


def simulate_current_sweep(params: SpinSystemParams, axis, currents_a,
                           scale_g_per_a: float, grid,
                           spec: FieldSweepFitSpec | None = None,
                           amplitude_171: float = 1.0, amplitude_i0: float = 1.0,
                           offset_ghz: float = 0.0) -> SweepData:
    """Forward model of a current sweep with the given true parameters."""
    spec = spec or FieldSweepFitSpec()
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    currents = np.asarray(currents_a, dtype=float)
    if isinstance(grid, tuple):
        lo, hi, n = grid
        x = np.linspace(lo, hi, int(n))
    else:
        x = np.asarray(grid, dtype=float)
    sweep = SweepData(currents, axis, x, np.zeros((currents.size, x.size)))
    p_vector = np.array([params.g_excited.parallel, params.g_excited.perpendicular,
                         scale_g_per_a, amplitude_171, amplitude_i0, offset_ghz])
    prediction = _sweep_prediction([sweep], params, spec, p_vector)
    return SweepData(currents, axis, x,
                     prediction.reshape(currents.size, x.size))


def fit_field_sweep(sweeps, spec: FieldSweepFitSpec,
                    params: SpinSystemParams) -> FitResult:
    """Joint fit of one or more current sweeps.

    Free parameters: excited g components, one field-calibration scale per
    sweep, the two isotope amplitudes and the frequency offset.  Sweeps
    along a single axis cannot constrain both g components (a sweep
    perpendicular to c never probes the parallel one); pass sweeps for both
    orientations to extract the full tensor.
    """
    if isinstance(sweeps, SweepData):
        sweeps = [sweeps]
    if not sweeps:
        raise ValidationError("need at least one sweep")
    for sweep in sweeps:
        if sweep.currents_a.size < 3:
            raise ValidationError("each sweep needs at least 3 field values")
    if len(spec.scales_g_per_a) != len(sweeps):
        raise ValidationError("one scale factor per sweep required")
    data = np.concatenate([s.absorption.reshape(-1) for s in sweeps])
    initial = np.array([spec.g_e_parallel, spec.g_e_perpendicular,
                        *spec.scales_g_per_a, spec.amplitude_171,
                        spec.amplitude_i0, spec.offset_ghz])
    names = (["g_e_parallel", "g_e_perpendicular"]
             + [f"scale_{k}" for k in range(len(sweeps))]
             + ["amplitude_171", "amplitude_i0", "offset_ghz"])
    return least_squares(lambda p: _sweep_prediction(sweeps, params, spec, p),
                         data, initial, names=tuple(names), tol=1e-12)


# --- photometric quantities ------------------------------------------------

def lorentz_local_field_factor(refractive_index: float) -> float:
    return (refractive_index**2 + 2.0) ** 2 / 9.0


def oscillator_strength(integrated_absorption_cm1_ghz, density_cm3: float,
                        refractive_index: float) -> float:
    """Oscillator strength from polarization-resolved integrated absorption.

    integrated_absorption values are integral(alpha d nu) in cm^-1 GHz, one
    per orthogonal polarization; missing entries may be filled by
    duplicating a measured one before calling.  Uses the classical
    absorption relation with the Lorentz local-field correction:
    f = (4 eps0 m_e c / e^2) (1/3N) sum_i chi_L^-1 integral(alpha_i d nu).
    """
    if density_cm3 <= 0:
        raise DomainError("ion density must be positive")
    values = np.asarray(integrated_absorption_cm1_ghz, dtype=float)
    if values.size != 3:
        raise ValidationError("need integrated absorption for 3 polarizations")
    chi = lorentz_local_field_factor(refractive_index)
    integral_si = values * 100.0 * 1e9      # cm^-1 GHz -> m^-1 Hz
    prefactor = 4.0 * EPSILON0_F_M * M_ELECTRON_KG * C_LIGHT_M_S / E_CHARGE_C**2
    density_m3 = density_cm3 * 1e6
    return float(prefactor / (3.0 * density_m3) * np.sum(integral_si / chi))


def spontaneous_rate_and_beta(f: float, wavelength_nm: float,
                              refractive_index: float,
                              t1_s: float) -> tuple[float, float]:
    """Two-level spontaneous emission rate and the implied branching ratio.

    Gamma_s = 2 pi e^2 nu^2 / (eps0 m_e c^3) n^2 chi_L f;  beta = Gamma_s T1.
    """
    if min(f, wavelength_nm, refractive_index, t1_s) <= 0:
        raise ValidationError("all inputs must be positive")
    nu = C_LIGHT_M_S / (wavelength_nm * 1e-9)
    chi = lorentz_local_field_factor(refractive_index)
    gamma = (2.0 * math.pi * E_CHARGE_C**2 * nu**2
             / (EPSILON0_F_M * M_ELECTRON_KG * C_LIGHT_M_S**3)
             * refractive_index**2 * chi * f)
    return gamma, gamma * t1_s
