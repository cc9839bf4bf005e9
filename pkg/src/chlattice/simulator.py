"""Pseudo-spectral integration of the full lattice PDE and the reduced ODEs.

The field is stored as truncated Fourier amplitudes z_n over integer index
pairs |n1|,|n2| <= N; all geometry enters only through the multipliers
|n1*k1 + n2*k2|^2, so the collocation transform is a plain 2D FFT over the
fundamental cell regardless of how skew the lattice is.  The linear part is
diagonal and handled implicitly (exactly); the nonlinear term is evaluated
pointwise on a zero-padded grid (padding factor 2 removes cubic aliasing) and
treated explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BlowUp, NotConverged
from .lattice import CriticalSet, DualLattice
from .reduction import ReducedCoefficients, reduced_field, state_dimension
from .spectrum import ModelParams

_OVERFLOW_GUARD = 1e8
_MAX_HALVINGS = 8


@dataclass
class SpectralField:
    """Truncated Fourier amplitudes z[n1+N, n2+N] with Hermitian symmetry."""

    N: int
    z: np.ndarray  # complex, shape (2N+1, 2N+1)

    @classmethod
    def zeros(cls, N: int) -> "SpectralField":
        return cls(N, np.zeros((2 * N + 1, 2 * N + 1), dtype=complex))

    @classmethod
    def from_modes(cls, N: int, modes: dict) -> "SpectralField":
        """Build a field from {(n1, n2): amplitude}; the conjugate mode is
        filled in automatically."""
        f = cls.zeros(N)
        for (n1, n2), amp in modes.items():
            if max(abs(n1), abs(n2)) > N:
                raise ValueError(f"mode {(n1, n2)} outside truncation N={N}")
            f.z[n1 + N, n2 + N] = amp
            f.z[-n1 + N, -n2 + N] = np.conjugate(amp)
        f.z[N, N] = 0.0
        return f

    def get(self, n1: int, n2: int) -> complex:
        return complex(self.z[n1 + self.N, n2 + self.N])

    def copy(self) -> "SpectralField":
        return SpectralField(self.N, self.z.copy())

    def hermitian_violation(self) -> float:
        return float(np.max(np.abs(self.z - np.conjugate(self.z[::-1, ::-1]))))

    def enforce_reality(self):
        self.z = 0.5 * (self.z + np.conjugate(self.z[::-1, ::-1]))
        self.z[self.N, self.N] = 0.0

    def project_even(self):
        """Even fields have purely real amplitudes."""
        self.z = self.z.real.astype(complex)
        self.z[self.N, self.N] = 0.0

    def sup_norm(self, grid: int | None = None) -> float:
        u = self.collocate(grid or 2 * (2 * self.N + 1))
        return float(np.max(np.abs(u)))

    def collocate(self, M: int) -> np.ndarray:
        """Real-space samples on an M x M grid over the fundamental cell."""
        N = self.N
        if M < 2 * N + 1:
            raise ValueError("collocation grid below the truncation size")
        big = np.zeros((M, M), dtype=complex)
        idx = np.arange(-N, N + 1) % M
        big[np.ix_(idx, idx)] = self.z
        u = np.fft.ifft2(big) * (M * M)
        return u.real


@dataclass(frozen=True)
class SimConfig:
    N: int
    dt: float
    t_end: float
    scheme: str = "IMEX1"          # IMEX1 | IMEX2
    dealias: int = 2
    seed: int = 0
    init: str = "random"           # random | equilibrium | explicit
    init_amplitude: float = 1e-3
    init_field: SpectralField | None = None
    record_every: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("IMEX1", "IMEX2"):
            raise ValueError(f"unknown scheme {self.scheme}")


@dataclass
class SimResult:
    final_field: SpectralField
    times: np.ndarray
    shell_amplitudes: np.ndarray   # (samples, n_pairs)
    energy: np.ndarray
    escape_flag: bool
    escape_time: float | None
    dt_final: float
    diagnostics: dict = field(default_factory=dict)


def _multipliers(N: int, dual: DualLattice) -> np.ndarray:
    n = np.arange(-N, N + 1)
    N1, N2 = np.meshgrid(n, n, indexing="ij")
    kx = N1 * dual.k1[0] + N2 * dual.k2[0]
    ky = N1 * dual.k1[1] + N2 * dual.k2[1]
    return kx * kx + ky * ky


def _nonlinear_term(z: np.ndarray, N: int, M: int, q: np.ndarray,
                    params: ModelParams) -> np.ndarray:
    """N_k = -|k|^2 * (gamma2 u^2 + gamma3 u^3)_k on the dealiased grid."""
    big = np.zeros((M, M), dtype=complex)
    idx = np.arange(-N, N + 1) % M
    big[np.ix_(idx, idx)] = z
    u = np.fft.ifft2(big).real * (M * M)
    w = params.gamma2 * u * u + params.gamma3 * u * u * u
    w_hat = np.fft.fft2(w) / (M * M)
    return -q * w_hat[np.ix_(idx, idx)]


def step_pde(fld: SpectralField, dual: DualLattice, params: ModelParams,
             dt: float, dealias: int = 2) -> SpectralField:
    """One first-order IMEX step: implicit diagonal linear part, explicit
    pseudo-spectral nonlinearity."""
    N = fld.N
    M = max(dealias * (2 * N + 1), 2 * N + 2)
    q = _multipliers(N, dual)
    nl = _nonlinear_term(fld.z, N, M, q, params)
    denom = 1.0 + dt * (q * q - params.lam * q + params.sigma)
    z_new = (fld.z + dt * nl) / denom
    out = SpectralField(N, z_new)
    out.enforce_reality()
    if params.even_symmetry:
        out.project_even()
    peak = float(np.max(np.abs(out.z)))
    if not np.isfinite(peak) or peak > _OVERFLOW_GUARD:
        raise BlowUp("spectral amplitude exceeded the overflow guard")
    return out


def discrete_energy(fld: SpectralField, dual: DualLattice,
                    params: ModelParams, grid: int | None = None) -> float:
    """Discrete free energy; the gradient and quadratic terms are evaluated
    spectrally (Parseval), the cubic/quartic terms on a collocation grid."""
    N = fld.N
    M = grid or max(2 * (2 * N + 1), 2 * N + 2)
    q = _multipliers(N, dual)
    area = dual.cell_area
    quad = area * float(np.sum((0.5 * q - 0.5 * params.lam) * np.abs(fld.z) ** 2))
    u = fld.collocate(M)
    cell = area / (M * M)
    poly = cell * float(np.sum(params.gamma2 / 3.0 * u ** 3
                               + params.gamma3 / 4.0 * u ** 4))
    lr = 0.0
    if params.sigma > 0:
        mask = q > 0
        lr = 0.5 * params.sigma * area * float(
            np.sum(np.abs(fld.z[mask]) ** 2 / q[mask]))
    return quad + poly + lr


def _random_field(N: int, amplitude: float, seed: int,
                  even: bool) -> SpectralField:
    rng = np.random.default_rng(seed)
    f = SpectralField.zeros(N)
    re = rng.standard_normal((2 * N + 1, 2 * N + 1))
    im = rng.standard_normal((2 * N + 1, 2 * N + 1))
    f.z = (re + 1j * im).astype(complex)
    f.enforce_reality()
    if even:
        f.project_even()
    sup = f.sup_norm()
    if sup > 0:
        f.z *= amplitude / sup
    return f


def shell_amplitude(fld: SpectralField, cs: CriticalSet) -> np.ndarray:
    """Per-pair modal magnitude |z_k| + |z_-k| for each critical pair."""
    out = []
    for rep in cs.critical_indices:
        n1, n2 = int(rep[0]), int(rep[1])
        out.append(abs(fld.get(n1, n2)) + abs(fld.get(-n1, -n2)))
    return np.array(out)


def run_pde(config: SimConfig, dual: DualLattice, params: ModelParams,
            cs: CriticalSet) -> SimResult:
    """Integrate to t_end, tracking shell amplitudes and free energy.

    dt is halved (at most 8 times, permanently) whenever a step increases the
    energy beyond tolerance or overflows; persistent growth at the smallest
    step is recorded as an escape rather than an error.
    """
    N = config.N
    if N < 4 * cs.max_index:
        raise ValueError(
            f"truncation N={N} below 4x the shell index magnitude "
            f"{cs.max_index}")
    if config.init == "explicit":
        if config.init_field is None:
            raise ValueError("explicit init requires init_field")
        fld = config.init_field.copy()
        if fld.N != N:
            raise ValueError("init_field truncation does not match config")
    else:
        fld = _random_field(N, config.init_amplitude, config.seed,
                            params.even_symmetry)
    init_sup = max(fld.sup_norm(), 1e-300)
    escape_radius = min(1e3 * init_sup, 100.0)

    dt = config.dt
    halvings = 0
    t = 0.0
    times = [0.0]
    amps = [shell_amplitude(fld, cs)]
    energy = [discrete_energy(fld, dual, params)]
    escape = False
    escape_time = None
    steps = 0
    use_bdf2 = config.scheme == "IMEX2"
    prev = None  # (field, nl) history for BDF2
    q = _multipliers(N, dual)
    M = max(config.dealias * (2 * N + 1), 2 * N + 2)

    while t < config.t_end - 1e-14:
        dt_step = min(dt, config.t_end - t)
        try:
            if use_bdf2 and prev is not None and dt_step == dt:
                nl_now = _nonlinear_term(fld.z, N, M, q, params)
                rhs = ((4.0 * fld.z - prev[0]) / 3.0
                       + (2.0 * dt_step / 3.0) * (2.0 * nl_now - prev[1]))
                denom = 1.0 + (2.0 * dt_step / 3.0) * (
                    q * q - params.lam * q + params.sigma)
                nxt = SpectralField(N, rhs / denom)
                nxt.enforce_reality()
                if params.even_symmetry:
                    nxt.project_even()
                if not np.isfinite(nxt.z).all() or \
                        float(np.max(np.abs(nxt.z))) > _OVERFLOW_GUARD:
                    raise BlowUp("spectral amplitude exceeded the overflow guard")
                new_prev = (fld.z.copy(),
                            _nonlinear_term(fld.z, N, M, q, params))
            else:
                nxt = step_pde(fld, dual, params, dt_step, config.dealias)
                new_prev = (fld.z.copy(),
                            _nonlinear_term(fld.z, N, M, q, params))
        except BlowUp:
            if halvings < _MAX_HALVINGS:
                dt *= 0.5
                halvings += 1
                prev = None
                continue
            escape = True
            escape_time = t
            break

        e_new = discrete_energy(nxt, dual, params)
        tol_energy = 1e-8 * abs(energy[-1]) + 1e-12
        if e_new > energy[-1] + tol_energy:
            if halvings < _MAX_HALVINGS:
                dt *= 0.5
                halvings += 1
                prev = None
                continue
            # Persistent energy growth at the smallest step: treat as escape.
            escape = True
            escape_time = t
            break

        fld = nxt
        prev = new_prev
        t += dt_step
        steps += 1
        times.append(t)
        amps.append(shell_amplitude(fld, cs))
        energy.append(e_new)

        if fld.sup_norm() >= escape_radius:
            escape = True
            escape_time = t
            break

    return SimResult(
        final_field=fld,
        times=np.array(times),
        shell_amplitudes=np.array(amps),
        energy=np.array(energy),
        escape_flag=escape,
        escape_time=escape_time,
        dt_final=dt,
        diagnostics={"steps": steps, "halvings": halvings},
    )


def run_reduced(rc: ReducedCoefficients, y0, dt: float, t_end: float,
                record_every: int = 1):
    """Classical RK4 trajectory of the reduced system.

    Returns (times, states); raises BlowUp if the state escapes.
    """
    dim = state_dimension(rc.case)
    y = np.asarray(y0, dtype=float)
    if y.shape != (dim,):
        raise ValueError(f"state dimension {y.shape} != {dim} for {rc.case}")
    guard = 1e6
    steps = int(round(t_end / dt))
    times = [0.0]
    states = [y.copy()]
    for i in range(steps):
        k1 = reduced_field(rc, y)
        k2 = reduced_field(rc, y + 0.5 * dt * k1)
        k3 = reduced_field(rc, y + 0.5 * dt * k2)
        k4 = reduced_field(rc, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(y).all() or np.max(np.abs(y)) > guard:
            raise BlowUp("reduced trajectory escaped",
                         time=(i + 1) * dt)
        if (i + 1) % record_every == 0 or i == steps - 1:
            times.append((i + 1) * dt)
            states.append(y.copy())
    return np.array(times), np.array(states)


def quasi_steady_drift(result: SimResult, window: float = 0.1) -> float:
    """Relative drift of the total shell amplitude per unit time over the
    trailing window (fraction of the run)."""
    total = result.shell_amplitudes.sum(axis=1)
    t = result.times
    if len(t) < 3 or t[-1] == 0:
        return np.inf
    t_lo = t[-1] * (1.0 - window)
    sel = t >= t_lo
    if sel.sum() < 2:
        sel = np.zeros_like(sel)
        sel[-2:] = True
    a = total[sel]
    span = t[sel][-1] - t[sel][0]
    if span <= 0 or a[-1] == 0:
        return np.inf
    return abs(a[-1] - a[0]) / (abs(a[-1]) * span)


def compare_full_vs_reduced(config: SimConfig, dual: DualLattice,
                            cs: CriticalSet, params_at, rc_at,
                            factors=(1.005, 1.01, 1.02),
                            drift_tol: float = 1e-6) -> dict:
    """Validate the reduction dynamically on a two-member shell.

    For each lambda = factor * lambda0 the PDE is run to a quasi-steady state
    and the settled shell amplitude is compared with the predicted circle
    radius 2*sqrt(-beta/eta); the scaling exponent of amplitude versus
    (lambda - lambda0) is fitted by least squares (expected: 1/2).
    """
    lam0 = cs.lambda0
    rows = []
    for f in factors:
        lam = f * lam0
        params = params_at(lam)
        rc = rc_at(lam)
        result = run_pde(config, dual, params, cs)
        drift = quasi_steady_drift(result)
        if result.escape_flag:
            raise NotConverged(f"trajectory escaped at lambda factor {f}")
        if drift > drift_tol:
            raise NotConverged(
                f"PDE not quasi-steady at lambda factor {f} (drift {drift:g})")
        observed = float(result.shell_amplitudes[-1].sum())
        predicted = 2.0 * np.sqrt(-rc.beta / rc.eta)
        rows.append({
            "lambda_factor": f,
            "observed": observed,
            "predicted": float(predicted),
            "relative_error": abs(observed - predicted) / predicted,
        })
    x = np.log([f * lam0 - lam0 for f in factors])
    yv = np.log([r["observed"] for r in rows])
    exponent = float(np.polyfit(x, yv, 1)[0])
    return {"points": rows, "scaling_exponent": exponent}
