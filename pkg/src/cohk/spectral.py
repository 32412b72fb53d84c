"""Spectral analysis through autocorrelation of the coherent product.

Everything here consumes K_t(z, z') = <z| e^{-i t H / hbar} |z'>, sampled
on a uniform grid by exact oscillator stepping.  Time averages pick out
eigencomponents, a Hann-windowed Fourier scan locates spectral lines, and
damped one-sided quadrature

    G(E) = -iota * integral_0^tmax e^{iota t E} K_t dt,   iota = i / hbar

produces resolvent matrix elements for Im E > 0 (the sign is fixed by the
zero-generator case G(E) = K/E).  Negative times are synthesized from
K_{-t}(z, z') = conj(K_t(z', z)) rather than integrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError
from .dynamics import AutocorrSeries, flow_exact
from .fock import dgamma_element, gen_block, klauder_kernel, osc_act, osc_from_block

__all__ = [
    "ResolventSample",
    "SpectralLine",
    "eigencomponent_overlap",
    "kt_roundtrip_residual",
    "oscillator_series",
    "rational_element",
    "resolvent_element",
    "resolvent_equation_residual",
    "resolvent_symmetry_residual",
    "schwinger_dyson_residual",
    "spectral_density",
    "spectrum_scan",
    "time_average_overlap",
]


@dataclass
class SpectralLine:
    energy: float
    weight: float


@dataclass
class ResolventSample:
    E: complex
    value: complex
    eta_extrapolated: bool = False


# ---------------------------------------------------------------------------
# series construction


def _flow_points(gen, z_start, n_steps, dt, hbar):
    """Labels psi(k dt) for k = 0..n_steps, by iterating one exact step."""
    from scipy.linalg import expm

    step = osc_from_block(expm((-1j * dt / hbar) * gen_block(gen)))
    pts = np.empty((n_steps + 1, gen.n + 1), dtype=complex)
    pts[0] = np.asarray(z_start, dtype=complex)
    for k in range(n_steps):
        pts[k + 1] = osc_act(step, pts[k])
    return pts


def oscillator_series(gen, z, zp, t_max, dt, hbar=1.0):
    """AutocorrSeries of K_t(z, z') on t = 0 .. t_max for H = dGamma(gen)."""
    if dt <= 0 or t_max <= 0:
        raise DomainError("need dt > 0 and t_max > 0")
    n_steps = int(round(t_max / dt))
    if n_steps > 20_000_000:
        raise DomainError(
            f"{n_steps} steps for t_max={t_max:g}, dt={dt:g}; an energy this "
            "close to the real axis needs the eta extrapolation instead"
        )
    pts = _flow_points(gen, zp, n_steps, dt, hbar)
    z = np.asarray(z, dtype=complex)
    expo = np.conj(z[0]) + pts[:, 0] + pts[:, 1:] @ np.conj(z[1:])
    return AutocorrSeries(0.0, dt, np.exp(expo), space_id=f"klauder({gen.n})",
                          z=z, zp=np.asarray(zp, dtype=complex), hbar=hbar)


def _two_sided(series, swapped):
    """values on t = -T..T, using K_{-t}(z,z') = conj(K_t(z',z))."""
    fwd = np.asarray(series.values)
    if swapped is None:
        zq, zpq = series.z, series.zp
        if zq is not None and zpq is not None and not np.allclose(zq, zpq):
            raise DomainError(
                "off-diagonal series needs the swapped-argument series "
                "to synthesize negative times"
            )
        back = fwd
    else:
        if len(swapped.values) != len(fwd) or swapped.dt != series.dt:
            raise DomainError("swapped series must share the time grid")
        back = np.asarray(swapped.values)
    return np.concatenate([np.conj(back[:0:-1]), fwd])


def time_average_overlap(series, E, T, swapped=None):
    """(1/2T) integral_{-T}^{T} e^{iota t E} K_t dt, trapezoid.

    Converges to the eigenspace-projection element <z|Pi(E)|z'> as T grows;
    off the spectrum it decays like 1/T.
    """
    dt = series.dt
    n = int(round(T / dt))
    if series.t0 != 0.0 or n > len(series.values) - 1 or n < 1:
        raise DomainError("series does not cover [-T, T]")
    vals = _two_sided(series, swapped)
    mid = len(series.values) - 1
    v = vals[mid - n : mid + n + 1]
    t = dt * np.arange(-n, n + 1)
    iota = 1j / series.hbar
    integrand = np.exp(iota * E * t) * v
    return complex(np.trapezoid(integrand, dx=dt) / (2.0 * T))


def eigencomponent_overlap(space, zp, traj, E, T, hbar=1.0):
    """One-sided time average of e^{iota t E} K(z', psi(t)) over [0, T]."""
    dt = float(traj.times[1] - traj.times[0])
    n = int(round(T / dt))
    if n > len(traj.points) - 1 or n < 1:
        raise DomainError("trajectory does not cover [0, T]")
    pts = traj.points[: n + 1]
    vals = np.array([space.kernel(zp, p) for p in pts])
    t = dt * np.arange(n + 1)
    integrand = np.exp((1j / hbar) * E * t) * vals
    return complex(np.trapezoid(integrand, dx=dt) / T)


# ---------------------------------------------------------------------------
# line spectrum


def _windowed_coefficient(vals, dt, T, E, hbar, chunk=256):
    """(1/2T) integral w(t) e^{iota t E} K_t dt on the symmetric grid, for an
    array of energies, evaluated in chunks to bound memory."""
    n = (len(vals) - 1) // 2
    t = dt * np.arange(-n, n + 1)
    w = 0.5 * (1.0 + np.cos(np.pi * t / T))
    trap = np.ones(len(t))
    trap[0] = trap[-1] = 0.5
    base = w * trap * vals * (dt / (2.0 * T))
    E = np.atleast_1d(np.asarray(E, dtype=float))
    out = np.empty(len(E), dtype=complex)
    iota = 1j / hbar
    for i in range(0, len(E), chunk):
        ph = np.exp(iota * np.outer(E[i : i + chunk], t))
        out[i : i + chunk] = ph @ base
    return out


def spectrum_scan(series, E_grid, swapped=None, floor=1e-4):
    """Locate spectral lines by a Hann-windowed scan of the autocorrelation.

    The grid must be at least as fine as pi/T (Rayleigh limit of the
    window, which doubles the raw resolution).  Peaks are refined twice by
    parabolic interpolation and re-evaluated exactly at the refined
    energy; the Hann coherent gain of 0.5 is divided out of the weight.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    if len(E_grid) < 3:
        raise DomainError("energy grid too short")
    cell = float(E_grid[1] - E_grid[0])
    dt = series.dt
    T = dt * (len(series.values) - 1)
    if cell > math.pi / T * (1.0 + 1e-9):
        raise DomainError(
            f"grid spacing {cell:g} exceeds the window resolution pi/T = "
            f"{math.pi / T:g}; lines could fall between samples"
        )
    vals = _two_sided(series, swapped)
    hbar = series.hbar
    mag = np.abs(_windowed_coefficient(vals, dt, T, E_grid, hbar))
    top = float(mag.max())
    peaks = [i for i in range(1, len(E_grid) - 1)
             if mag[i] >= floor * top
             and mag[i] >= mag[i - 1] and mag[i] > mag[i + 1]]
    # Greedy sidelobe rejection, strongest first: a candidate sitting within
    # the sidelobe envelope of an already-accepted line (|W| <= 1/(pi x |x^2-1|)
    # at x energy cells of pi/T, with a 3x safety factor) is an artifact of
    # the window, not a line.
    peaks.sort(key=lambda i: -mag[i])
    accepted = []
    for i in peaks:
        keep = True
        for j in accepted:
            x = abs(E_grid[i] - E_grid[j]) * T / math.pi
            if x < 1.5:
                keep = False
                break
            env = 1.0 / (math.pi * x * abs(x * x - 1.0))
            if mag[i] < 3.0 * env * mag[j]:
                keep = False
                break
        if keep:
            accepted.append(i)
    lines = []
    for i in accepted:
        e_ref = E_grid[i]
        h = cell
        for _ in range(2):
            m3 = np.abs(_windowed_coefficient(
                vals, dt, T, [e_ref - h, e_ref, e_ref + h], hbar))
            denom = m3[0] - 2.0 * m3[1] + m3[2]
            if denom < 0.0:
                e_ref += 0.5 * h * (m3[0] - m3[2]) / denom
            h /= 4.0
        c_star = np.abs(_windowed_coefficient(vals, dt, T, [e_ref], hbar))[0]
        lines.append(SpectralLine(float(e_ref), float(c_star / 0.5)))
    lines.sort(key=lambda L: L.energy)
    return lines


# ---------------------------------------------------------------------------
# resolvent quadrature


def _auto_t_max(E, hbar):
    return hbar * math.log(1e12) / E.imag


def _resolvent_series(ham, z, zp, E, t_max, dt):
    E = complex(E)
    if E.imag <= 0:
        raise DomainError("direct resolvent quadrature needs Im E > 0")
    hbar = ham.hbar
    if t_max <= 0:
        t_max = _auto_t_max(E, hbar)
    series = oscillator_series(ham.gen, z, zp, t_max, dt, hbar)
    t = series.times
    iota = 1j / hbar
    return series, np.exp(iota * E * t), t


def resolvent_element(space, ham, z, zp, E, t_max=0.0, dt=1e-2):
    """<z| (E - H)^{-1} |z'> = -iota integral_0^tmax e^{iota t E} K_t dt.

    t_max defaults to the point where the damping e^{-Im E t / hbar} falls
    below 1e-12.
    """
    series, phase, t = _resolvent_series(ham, z, zp, E, t_max, dt)
    iota = 1j / ham.hbar
    val = -iota * np.trapezoid(phase * series.values, dx=series.dt)
    return ResolventSample(complex(E), complex(val))


def resolvent_symmetry_residual(space, ham, z, zp, E, t_max=0.0, dt=1e-2):
    """|G(E)(z,z') - conj(G(conj E)(z',z))| via an independent reflected
    quadrature: the swapped element integrates the backward flow of z
    against z', so no value is reused between the two routes."""
    g = resolvent_element(space, ham, z, zp, E, t_max, dt).value
    E = complex(E)
    hbar = ham.hbar
    if t_max <= 0:
        t_max = _auto_t_max(E, hbar)
    n_steps = int(round(t_max / dt))
    from scipy.linalg import expm

    step = osc_from_block(expm((+1j * dt / hbar) * gen_block(ham.gen)))
    pts = np.empty((n_steps + 1, ham.gen.n + 1), dtype=complex)
    pts[0] = np.asarray(z, dtype=complex)
    for k in range(n_steps):
        pts[k + 1] = osc_act(step, pts[k])
    zp = np.asarray(zp, dtype=complex)
    kvals = np.exp(np.conj(zp[0]) + pts[:, 0] + pts[:, 1:] @ np.conj(zp[1:]))
    t = dt * np.arange(n_steps + 1)
    iota = 1j / hbar
    b = iota * np.trapezoid(np.exp(-iota * np.conj(E) * t) * kvals, dx=dt)
    return abs(g - np.conj(b))


def _resolvent_at_root(space, ham, z, zp, root, eta, dt):
    root = complex(root)
    if root.imag > 1e-12:
        return resolvent_element(space, ham, z, zp, root, 0.0, dt).value, False
    if root.imag < -1e-12:
        # lower half-plane through the symmetry G(conj E)(z,z') = conj(G(E)(z',z))
        g = resolvent_element(space, ham, zp, z, np.conj(root), 0.0, dt).value
        return np.conj(g), False
    g1 = resolvent_element(space, ham, z, zp, root + 1j * eta, 0.0, dt).value
    g2 = resolvent_element(space, ham, z, zp, root + 0.5j * eta, 0.0, dt).value
    return 2.0 * g2 - g1, True


def rational_element(space, ham, z, zp, A_roots, B_coeffs, eta=0.05,
                     spectrum=None, dt=1e-2):
    """<z| B(H)/A(H) |z'> by partial fractions over the simple roots of A.

    B(x)/A(x) = sum_j B(E_j)/A'(E_j) / (x - E_j) and 1/(H - E_j) is
    -G(E_j), hence the overall minus sign.  Real roots use the two-point
    (eta, eta/2) linear extrapolation of the damped quadrature.  When a
    detected spectrum is supplied, roots closer than 3*eta to a line are
    rejected.
    """
    roots = [complex(r) for r in A_roots]
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= 1e-8:
                raise DomainError(f"repeated root near {roots[i]}")
    B_coeffs = [complex(b) for b in B_coeffs]
    if len(B_coeffs) >= len(roots) + 1:
        raise DomainError("deg B must be smaller than deg A")
    if spectrum is not None:
        for r in roots:
            for line in spectrum:
                if abs(r - line.energy) <= 3.0 * eta:
                    raise DomainError(
                        f"root {r} sits on a spectral line at {line.energy}"
                    )

    def B(x):
        return sum(c * x ** k for k, c in enumerate(B_coeffs))

    total = 0.0 + 0.0j
    for j, rj in enumerate(roots):
        aprime = np.prod([rj - rk for k, rk in enumerate(roots) if k != j]) \
            if len(roots) > 1 else 1.0
        g, _ = _resolvent_at_root(space, ham, z, zp, rj, eta, dt)
        total += B(rj) / aprime * g
    return complex(-total)


def spectral_density(space, ham, z, zp, E_grid, eta, dt=1e-2):
    """-(1/pi) Im G(E + i eta) on the energy grid, from one shared series."""
    if eta <= 0:
        raise DomainError("eta must be positive")
    hbar = ham.hbar
    t_max = hbar * math.log(1e12) / eta
    series = oscillator_series(ham.gen, z, zp, t_max, dt, hbar)
    t = series.times
    iota = 1j / hbar
    damp = series.values * np.exp(-eta * t / hbar)
    trap = np.ones(len(t))
    trap[0] = trap[-1] = 0.5
    base = damp * trap * dt
    E_grid = np.asarray(E_grid, dtype=float)
    out = np.empty(len(E_grid))
    for i in range(0, len(E_grid), 256):
        ph = np.exp(iota * np.outer(E_grid[i : i + 256], t))
        g = -iota * (ph @ base)
        out[i : i + 256] = -g.imag / math.pi
    return out


def kt_roundtrip_residual(space, ham, z, zp, t, eta, E_grid, dt=1e-2):
    """|integral e^{-iota t E} density(E) dE - K_t| / |K_0|.

    The grid must cover everywhere the density lives, with at least 20 eta
    to spare at both ends, so the Lorentzian tails that fall outside stay
    inside the stated error budget.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    dens = spectral_density(space, ham, z, zp, E_grid, eta, dt)
    support = E_grid[dens > 1e-2 * dens.max()]
    if len(support) and (support.min() - E_grid[0] < 20 * eta
                         or E_grid[-1] - support.max() < 20 * eta):
        raise DomainError("energy grid does not span the spectrum with "
                          "margin 20 eta")
    hbar = ham.hbar
    iota = 1j / hbar
    lhs = np.trapezoid(np.exp(-iota * t * E_grid) * dens, x=E_grid)
    kt = klauder_kernel(z, flow_exact(ham.gen, t, zp, hbar))
    k0 = klauder_kernel(z, zp)
    return abs(lhs - kt) / abs(k0)


# ---------------------------------------------------------------------------
# equation residuals


def schwinger_dyson_residual(space, ham, z, zp, t, dt_fd=1e-4):
    """|i hbar dK_t/dt - <z| H e^{-iota t H} |z'>| / |K_t|.

    The time derivative is a central difference of exact flows; the right
    side is the closed-form dGamma element at the evolved label.
    """
    if dt_fd <= 0:
        raise DomainError("dt_fd must be positive")
    hbar = ham.hbar
    kp = klauder_kernel(z, flow_exact(ham.gen, t + dt_fd, zp, hbar))
    km = klauder_kernel(z, flow_exact(ham.gen, t - dt_fd, zp, hbar))
    dk = (kp - km) / (2.0 * dt_fd)
    psi = flow_exact(ham.gen, t, zp, hbar)
    rhs = dgamma_element(ham.gen, z, psi)
    kt = klauder_kernel(z, psi)
    return abs(1j * hbar * dk - rhs) / max(1e-300, abs(kt))


def resolvent_equation_residual(space, ham, z, zp, E, t_max=0.0, dt=1e-2):
    """|E G(E) - <z| H G(E) |z'> - K(z,z')| / |K(z,z')|.

    The H G term integrates the dGamma element along the same damped
    quadrature as G itself.
    """
    series, phase, t = _resolvent_series(ham, z, zp, E, t_max, dt)
    hbar = ham.hbar
    iota = 1j / hbar
    g = -iota * np.trapezoid(phase * series.values, dx=series.dt)
    n_steps = len(t) - 1
    pts = _flow_points(ham.gen, zp, n_steps, series.dt, hbar)
    hvals = np.array([dgamma_element(ham.gen, z, p) for p in pts])
    og = -iota * np.trapezoid(phase * hvals, dx=series.dt)
    k = klauder_kernel(z, zp)
    return abs(E * g - og - k) / abs(k)
