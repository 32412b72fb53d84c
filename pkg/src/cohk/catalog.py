"""Concrete coherent spaces and the finite-difference derivation oracle.

Eight spaces are provided, each with a vectorized kernel, seeded samplers
and closed-form first/second kernel derivatives:

========== =========================== =================================
name       points                      kernel
========== =========================== =================================
euclidean  real n-vectors              z^T z'
hermitian  complex n-vectors           z* z'
sphere     unit complex n-vectors      z* z'
klauder    [z0, zhat] in C x C^n       exp(conj(z0) + z0' + zhat* zhat')
reciprocal positive reals              1 / (z + z')
szego      unit disk                   1 / (1 - conj(z) z')
schur      unit disk, Schur map s      (1 - conj(s(z)) s(z')) / (1 - conj(z) z')
debranges  complex plane, structure E  see :class:`DeBrangesSpace`
========== =========================== =================================

Derivations along chart paths are written L_X (left slot) and R_X (right
slot).  The finite-difference versions are the ground truth the closed
forms are validated against: central differences with one Richardson
level, step 1e-5 * max(1, |z|), paths re-projected on the sphere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import AxiomViolationError, CoherentSpace, DomainError

__all__ = [
    "DeBrangesSpace",
    "EuclideanSpace",
    "GeometryReport",
    "HermitianSpace",
    "KlauderSpace",
    "PotentialReport",
    "ReciprocalSpace",
    "SchurSpace",
    "SzegoSpace",
    "UnitSphereSpace",
    "commutation_check",
    "fd_L",
    "fd_LR",
    "fd_R",
    "geometry_report",
    "infinitesimal_cs_margin",
    "make_space",
    "metric_g",
    "one_form_theta",
    "potential_inequality_check",
    "space_names",
    "two_form_omega",
    "wtg_matrix",
]


def _finite(arr):
    return bool(np.all(np.isfinite(np.atleast_1d(arr).view(float))))


# ---------------------------------------------------------------------------
# vector-chart spaces


class EuclideanSpace(CoherentSpace):
    """R^n with the bilinear kernel K(z, z') = z^T z' (no conjugation)."""

    complex_chart = False

    def __init__(self, dim):
        if dim < 1:
            raise DomainError("euclidean dimension must be >= 1")
        self.dim = dim
        self.coord_len = dim
        self.space_id = f"euclidean({dim})"

    def kernel(self, z, zp):
        return complex(np.dot(z, zp))

    def kernel_batch(self, Z, Zp):
        return np.sum(Z * Zp, axis=-1).astype(complex)

    def validate(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise DomainError(f"expected a real vector of length {self.dim}")
        if not _finite(z):
            raise DomainError("non-finite coordinates")
        return z

    def sample_point(self, rng):
        return rng.normal(size=self.dim)

    def sample_points(self, rng, n):
        return rng.normal(size=(n, self.dim))

    def sample_tangent(self, z, rng):
        return rng.normal(size=self.dim)

    def theta_form(self, z, X):
        return complex(np.dot(z, X))

    def mixed_form(self, z, X, Y):
        return complex(np.dot(X, Y))

    def has_closed_geometry(self, z):
        return True


class HermitianSpace(CoherentSpace):
    """C^n with the sesquilinear kernel K(z, z') = z* z'."""

    def __init__(self, dim):
        if dim < 1:
            raise DomainError("hermitian dimension must be >= 1")
        self.dim = dim
        self.coord_len = dim
        self.space_id = f"hermitian({dim})"

    def kernel(self, z, zp):
        return complex(np.vdot(z, zp))

    def kernel_batch(self, Z, Zp):
        return np.sum(np.conj(Z) * Zp, axis=-1)

    def validate(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.dim,):
            raise DomainError(f"expected a complex vector of length {self.dim}")
        if not _finite(z):
            raise DomainError("non-finite coordinates")
        return z

    def sample_point(self, rng):
        return (rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)) / math.sqrt(2)

    def sample_points(self, rng, n):
        sh = (n, self.dim)
        return (rng.normal(size=sh) + 1j * rng.normal(size=sh)) / math.sqrt(2)

    def sample_tangent(self, z, rng):
        return (rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)) / math.sqrt(2)

    def theta_form(self, z, X):
        return complex(np.vdot(z, X))

    def mixed_form(self, z, X, Y):
        return complex(np.vdot(X, Y))

    def has_closed_geometry(self, z):
        return True


class UnitSphereSpace(HermitianSpace):
    """Unit sphere in C^n with the restricted kernel z* z'.

    Chart paths re-project onto the sphere after each displacement, which
    leaves first derivatives (and mixed L R second derivatives) unchanged
    while keeping every probe point in the domain.  Tangents at z satisfy
    Re(z* X) = 0.
    """

    def __init__(self, dim):
        super().__init__(dim)
        self.space_id = f"sphere({dim})"

    def validate(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.dim,):
            raise DomainError(f"expected a complex vector of length {self.dim}")
        if not _finite(z):
            raise DomainError("non-finite coordinates")
        if abs(np.vdot(z, z).real - 1.0) > 1e-12:
            raise DomainError("point is not on the unit sphere")
        return z

    def chart_path(self, z, X, t):
        w = z + t * X
        return w / math.sqrt(np.vdot(w, w).real)

    def sample_point(self, rng):
        v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return v / math.sqrt(np.vdot(v, v).real)

    def sample_points(self, rng, n):
        V = rng.normal(size=(n, self.dim)) + 1j * rng.normal(size=(n, self.dim))
        return V / np.sqrt(np.sum(np.abs(V) ** 2, axis=-1))[:, None]

    def sample_tangent(self, z, rng):
        X = (rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)) / math.sqrt(2)
        return X - z * np.vdot(z, X).real


class KlauderSpace(CoherentSpace):
    """C x C^n with K(z, z') = exp(conj(z0) + z0' + zhat* zhat').

    Points are flat complex arrays [z0, zhat_1, ..., zhat_n]; the completed
    span of its coherent states is the bosonic Fock space over C^n.
    """

    def __init__(self, dim):
        if dim < 1:
            raise DomainError("klauder mode count must be >= 1")
        self.dim = dim
        self.coord_len = dim + 1
        self.space_id = f"klauder({dim})"

    def kernel(self, z, zp):
        return complex(cmath.exp(np.conj(z[0]) + zp[0] + np.vdot(z[1:], zp[1:])))

    def kernel_batch(self, Z, Zp):
        expo = np.conj(Z[..., 0]) + Zp[..., 0] + np.sum(
            np.conj(Z[..., 1:]) * Zp[..., 1:], axis=-1
        )
        return np.exp(expo)

    def validate(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.coord_len,):
            raise DomainError(
                f"expected [z0, zhat] as a complex vector of length {self.coord_len}"
            )
        if not _finite(z):
            raise DomainError("non-finite coordinates")
        return z

    def sample_point(self, rng):
        v = rng.normal(size=self.coord_len) + 1j * rng.normal(size=self.coord_len)
        return 0.5 * v

    def sample_points(self, rng, n):
        sh = (n, self.coord_len)
        return 0.5 * (rng.normal(size=sh) + 1j * rng.normal(size=sh))

    def sample_tangent(self, z, rng):
        v = rng.normal(size=self.coord_len) + 1j * rng.normal(size=self.coord_len)
        return 0.5 * v

    # u(X) = X0 + zhat* Xhat collects how the exponent responds to the
    # right-slot displacement X at the diagonal point.
    def _u(self, z, X):
        return complex(X[0] + np.vdot(z[1:], X[1:]))

    def theta_form(self, z, X):
        return self.kernel(z, z) * self._u(z, X)

    def mixed_form(self, z, X, Y):
        k = self.kernel(z, z)
        return k * (np.vdot(X[1:], Y[1:]) + np.conj(self._u(z, X)) * self._u(z, Y))

    def mixed_matrix(self, z):
        """Hermitian matrix H with L_X R_Y K(z,z) = X* H Y over chart coords."""
        m = self.coord_len
        k = self.kernel(z, z)
        u = np.concatenate(([1.0 + 0j], np.conj(z[1:])))
        h = np.outer(np.conj(u), u)
        h[1:, 1:] += np.eye(m - 1)
        return k * h

    def has_closed_geometry(self, z):
        return True


# ---------------------------------------------------------------------------
# scalar-chart spaces


class _ScalarSpace(CoherentSpace):
    coord_len = 1

    def sample_tangent(self, z, rng):
        return complex(rng.normal() + 1j * rng.normal()) / math.sqrt(2)


class ReciprocalSpace(_ScalarSpace):
    """Positive half-line with K(z, z') = 1 / (z + z') (Hilbert-matrix kernel)."""

    complex_chart = False

    def __init__(self):
        self.space_id = "reciprocal"

    def kernel(self, z, zp):
        return complex(1.0 / (z + zp))

    def kernel_batch(self, Z, Zp):
        return (1.0 / (Z + Zp)).astype(complex)

    def validate(self, z):
        z = float(z)
        if not math.isfinite(z) or z <= 0.0:
            raise DomainError("reciprocal points are strictly positive reals")
        return z

    def sample_point(self, rng):
        return float(rng.uniform(0.4, 2.5))

    def sample_points(self, rng, n):
        return rng.uniform(0.4, 2.5, size=n)

    def sample_tangent(self, z, rng):
        return float(rng.normal())

    def theta_form(self, z, X):
        return complex(-X / (4.0 * z * z))

    def mixed_form(self, z, X, Y):
        return complex(X * Y / (4.0 * z ** 3))

    def has_closed_geometry(self, z):
        return True


class SzegoSpace(_ScalarSpace):
    """Open unit disk with the Szego kernel K(z, z') = 1 / (1 - conj(z) z')."""

    def __init__(self):
        self.space_id = "szego"

    def kernel(self, z, zp):
        return complex(1.0 / (1.0 - np.conj(z) * zp))

    def kernel_batch(self, Z, Zp):
        return 1.0 / (1.0 - np.conj(Z) * Zp)

    def validate(self, z):
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError("non-finite coordinate")
        if abs(z) >= 1.0:
            raise DomainError("szego points lie in the open unit disk")
        return z

    def sample_point(self, rng):
        r = rng.uniform(0.05, 0.75)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        return complex(r * cmath.exp(1j * phi))

    def sample_points(self, rng, n):
        r = rng.uniform(0.05, 0.75, size=n)
        phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return r * np.exp(1j * phi)

    def theta_form(self, z, X):
        d = 1.0 - abs(z) ** 2
        return complex(np.conj(z) * X / d ** 2)

    def mixed_form(self, z, X, Y):
        d = 1.0 - abs(z) ** 2
        return complex(np.conj(X) * Y * (1.0 + abs(z) ** 2) / d ** 3)

    def has_closed_geometry(self, z):
        return True


class SchurSpace(_ScalarSpace):
    """Unit disk with K(z, z') = (1 - conj(s(z)) s(z')) / (1 - conj(z) z').

    ``s`` must be analytic on the disk with |s| <= 1 (a Schur function) and
    is supplied together with its derivative; both are checked on a sample
    grid at construction.
    """

    def __init__(self, s, s_prime, preset=None):
        self.s = s
        self.s_prime = s_prime
        self.preset = preset
        self.space_id = f"schur({preset})" if preset else "schur"
        for r in (0.0, 0.3, 0.6, 0.9):
            for k in range(8):
                w = r * cmath.exp(2j * math.pi * k / 8)
                if abs(complex(s(w))) > 1.0 + 1e-10:
                    raise DomainError(
                        f"|s({w})| = {abs(complex(s(w)))} > 1: not a Schur function"
                    )

    def kernel(self, z, zp):
        return complex(
            (1.0 - np.conj(self.s(z)) * self.s(zp)) / (1.0 - np.conj(z) * zp)
        )

    def kernel_batch(self, Z, Zp):
        return (1.0 - np.conj(self.s(Z)) * self.s(Zp)) / (1.0 - np.conj(Z) * Zp)

    validate = SzegoSpace.validate
    sample_point = SzegoSpace.sample_point
    sample_points = SzegoSpace.sample_points

    def theta_form(self, z, X):
        d = 1.0 - abs(z) ** 2
        sv = complex(self.s(z))
        dsv = complex(self.s_prime(z))
        a = (1.0 - abs(sv) ** 2) * np.conj(z) / d ** 2 - np.conj(sv) * dsv / d
        return complex(a * X)

    def mixed_form(self, z, X, Y):
        d = 1.0 - abs(z) ** 2
        sv = complex(self.s(z))
        dsv = complex(self.s_prime(z))
        ss = 1.0 - abs(sv) ** 2
        m0 = (
            ss / d ** 2
            + 2.0 * ss * abs(z) ** 2 / d ** 3
            - 2.0 * (np.conj(sv) * dsv * z).real / d ** 2
            - abs(dsv) ** 2 / d
        )
        return complex(np.conj(X) * Y * m0)

    def has_closed_geometry(self, z):
        return True


class DeBrangesSpace(_ScalarSpace):
    """Kernel built from a structure function E with |E(conj z)| < |E(z)| above
    the real axis:

        K(z, z') = [Ebar(u) E(w) - E(u) Ebar(w)] / (2i (u - w)),

    with u = conj(z), w = z' and Ebar(x) = conj(E(conj(x))).  On the real
    axis the quotient degenerates; below |u - w| = 1e-8 a first-order Taylor
    branch at the midpoint is used and Hermitized explicitly.  Closed-form
    derivatives use the quotient-rule expressions and need |Im z| >= 1e-4;
    elsewhere the finite-difference fallback takes over.
    """

    _diag_cut = 1e-8
    _closed_cut = 1e-4

    def __init__(self, E, E_prime, preset=None):
        self.E = E
        self.E_prime = E_prime
        self.preset = preset
        self.space_id = f"debranges({preset})" if preset else "debranges"
        for x in (-1.5, -0.5, 0.5, 1.5):
            for y in (0.3, 0.9):
                z = complex(x, y)
                if abs(self._Ebar(z)) >= abs(complex(E(z))):
                    raise DomainError(
                        f"|E(conj z)| >= |E(z)| at z = {z}: not a de Branges function"
                    )

    def _Ebar(self, x):
        return np.conj(self.E(np.conj(x)))

    def _Ebar_prime(self, x):
        return np.conj(self.E_prime(np.conj(x)))

    def _N(self, u, w):
        return self._Ebar(u) * self.E(w) - self.E(u) * self._Ebar(w)

    def _diag_branch(self, m):
        # limit of N / (2i (u - w)) as both arguments meet at m
        return (self.E(m) * self._Ebar_prime(m) - self.E_prime(m) * self._Ebar(m)) / 2j

    def _kernel_one_sided(self, z, zp):
        u, w = np.conj(z), zp
        d = u - w
        if abs(d) < self._diag_cut:
            return complex(self._diag_branch((u + w) / 2.0))
        return complex(self._N(u, w) / (2j * d))

    def kernel(self, z, zp):
        a = self._kernel_one_sided(z, zp)
        b = self._kernel_one_sided(zp, z)
        return (a + np.conj(b)) / 2.0

    def kernel_batch(self, Z, Zp):
        def one_sided(u, w):
            d = u - w
            near = np.abs(d) < self._diag_cut
            m = (u + w) / 2.0
            return np.where(
                near,
                (self.E(m) * self._Ebar_prime(m) - self.E_prime(m) * self._Ebar(m)) / 2j,
                self._N(u, w) / (2j * np.where(near, 1.0, d)),
            )

        Z = np.asarray(Z, dtype=complex)
        Zp = np.asarray(Zp, dtype=complex)
        return (one_sided(np.conj(Z), Zp) + np.conj(one_sided(np.conj(Zp), Z))) / 2.0

    def validate(self, z):
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError("non-finite coordinate")
        k = self.kernel(z, z)
        if k.real <= 0.0:
            raise DomainError("K(z,z) <= 0: point outside the usable domain")
        return z

    def sample_point(self, rng):
        x = rng.uniform(-1.5, 1.5)
        y = rng.uniform(0.1, 0.8) * (1.0 if rng.uniform() < 0.5 else -1.0)
        return complex(x, y)

    def sample_points(self, rng, n):
        x = rng.uniform(-1.5, 1.5, size=n)
        y = rng.uniform(0.1, 0.8, size=n) * np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
        return x + 1j * y

    def has_closed_geometry(self, z):
        return abs(complex(z).imag) >= self._closed_cut

    def _phi_w(self, u, w):
        d = u - w
        nw = self._Ebar(u) * self.E_prime(w) - self.E(u) * self._Ebar_prime(w)
        return nw / (2j * d) + self._N(u, w) / (2j * d * d)

    def _phi_uw(self, u, w):
        d = u - w
        n = self._N(u, w)
        nu = self._Ebar_prime(u) * self.E(w) - self.E_prime(u) * self._Ebar(w)
        nw = self._Ebar(u) * self.E_prime(w) - self.E(u) * self._Ebar_prime(w)
        nuw = self._Ebar_prime(u) * self.E_prime(w) - self.E_prime(u) * self._Ebar_prime(w)
        return (
            nuw / (2j * d)
            - nw / (2j * d * d)
            + nu / (2j * d * d)
            - 2.0 * n / (2j * d ** 3)
        )

    def theta_form(self, z, X):
        if not self.has_closed_geometry(z):
            raise NotImplementedError("closed form unstable this close to the real axis")
        return complex(X * self._phi_w(np.conj(z), z))

    def mixed_form(self, z, X, Y):
        if not self.has_closed_geometry(z):
            raise NotImplementedError("closed form unstable this close to the real axis")
        return complex(np.conj(X) * Y * self._phi_uw(np.conj(z), z))


# ---------------------------------------------------------------------------
# construction


_SCHUR_PRESETS = {
    "square": (lambda z: z * z, lambda z: 2.0 * z),
    "mobius": (
        lambda z: (2.0 * z + 1.0) / (z + 2.0),
        lambda z: 3.0 / (z + 2.0) ** 2,
    ),
}

_DEBRANGES_PRESETS = {
    "exp": (lambda z: np.exp(-1j * z), lambda z: -1j * np.exp(-1j * z)),
    "damped-linear": (
        lambda z: (z + 1j) * np.exp(-1j * z),
        lambda z: (2.0 - 1j * z) * np.exp(-1j * z),
    ),
}


def space_names():
    return ["euclidean", "hermitian", "sphere", "klauder", "reciprocal",
            "szego", "schur", "debranges"]


def make_space(kind, **params):
    """Build a catalog space from a JSON-friendly descriptor.

    ``kind`` may also be a dict {"kind": ..., ...} as used by the CLI
    config format.  Vector spaces take ``dim``; schur/debranges take either
    a ``preset`` name or explicit callables (``s``/``s_prime``,
    ``E``/``E_prime``).
    """
    if isinstance(kind, dict):
        params = {k: v for k, v in kind.items() if k != "kind"}
        kind = kind.get("kind")
    if kind == "euclidean":
        return EuclideanSpace(int(params.get("dim", 2)))
    if kind == "hermitian":
        return HermitianSpace(int(params.get("dim", 2)))
    if kind == "sphere":
        return UnitSphereSpace(int(params.get("dim", 2)))
    if kind == "klauder":
        return KlauderSpace(int(params.get("dim", 1)))
    if kind == "reciprocal":
        return ReciprocalSpace()
    if kind == "szego":
        return SzegoSpace()
    if kind == "schur":
        if "s" in params:
            return SchurSpace(params["s"], params["s_prime"])
        preset = params.get("preset", "mobius")
        if preset not in _SCHUR_PRESETS:
            raise DomainError(f"unknown schur preset {preset!r}")
        return SchurSpace(*_SCHUR_PRESETS[preset], preset=preset)
    if kind == "debranges":
        if "E" in params:
            return DeBrangesSpace(params["E"], params["E_prime"])
        preset = params.get("preset", "exp")
        if preset not in _DEBRANGES_PRESETS:
            raise DomainError(f"unknown debranges preset {preset!r}")
        return DeBrangesSpace(*_DEBRANGES_PRESETS[preset], preset=preset)
    raise DomainError(f"unknown space kind {kind!r}")


def default_spaces():
    """One representative instance of each of the eight catalog spaces."""
    return [
        make_space("euclidean", dim=2),
        make_space("hermitian", dim=2),
        make_space("sphere", dim=2),
        make_space("klauder", dim=1),
        make_space("reciprocal"),
        make_space("szego"),
        make_space("schur", preset="mobius"),
        make_space("debranges", preset="exp"),
    ]


# ---------------------------------------------------------------------------
# finite-difference oracle


def _point_scale(z):
    return max(1.0, float(np.linalg.norm(np.atleast_1d(np.asarray(z)))))


def _richardson(d_h, d_h2):
    return (4.0 * d_h2 - d_h) / 3.0


def fd_R(space, f, z, zp, X, h=None):
    """Central-difference R_X f(z, z') along the chart path through z'.

    One Richardson level (steps h and h/2); h defaults to
    1e-5 * max(1, |z'|).
    """
    if h is None:
        h = 1e-5 * _point_scale(zp)

    def d(step):
        return (f(z, space.chart_path(zp, X, step))
                - f(z, space.chart_path(zp, X, -step))) / (2.0 * step)

    out = _richardson(d(h), d(h / 2.0))
    if not np.all(np.isfinite([out.real, out.imag])):
        raise AxiomViolationError("non-finite finite difference")
    return out


def fd_L(space, f, z, zp, X, h=None):
    """Central-difference L_X f(z, z') along the chart path through z."""
    if h is None:
        h = 1e-5 * _point_scale(z)

    def d(step):
        return (f(space.chart_path(z, X, step), zp)
                - f(space.chart_path(z, X, -step), zp)) / (2.0 * step)

    out = _richardson(d(h), d(h / 2.0))
    if not np.all(np.isfinite([out.real, out.imag])):
        raise AxiomViolationError("non-finite finite difference")
    return out


def fd_LR(space, z, X, Y, f=None, h=None):
    """Mixed second difference L_X R_Y f evaluated at (z, z).

    Four-point stencil with one Richardson level.  Defaults to the kernel.
    """
    if f is None:
        f = space.kernel
    if h is None:
        h = 1e-5 * _point_scale(z)

    def d(step):
        fa = f(space.chart_path(z, X, step), space.chart_path(z, Y, step))
        fb = f(space.chart_path(z, X, step), space.chart_path(z, Y, -step))
        fc = f(space.chart_path(z, X, -step), space.chart_path(z, Y, step))
        fd_ = f(space.chart_path(z, X, -step), space.chart_path(z, Y, -step))
        return (fa - fb - fc + fd_) / (4.0 * step * step)

    out = _richardson(d(h), d(h / 2.0))
    if not np.all(np.isfinite([out.real, out.imag])):
        raise AxiomViolationError("non-finite finite difference")
    return out


def _fd_theta(space, z, X):
    return fd_R(space, space.kernel, z, z, X)


# ---------------------------------------------------------------------------
# geometry: theta, metric, two-form


def _closed_available(space, z):
    try:
        return space.has_closed_geometry(z)
    except NotImplementedError:
        return False


def one_form_theta(space, z, X, method="auto"):
    """theta(z)(X) = R_X K(z, z); closed form where the space has one."""
    if method not in ("auto", "closed", "fd"):
        raise ValueError("method must be auto, closed or fd")
    if method == "closed" or (method == "auto" and _closed_available(space, z)):
        return complex(space.theta_form(z, X))
    return complex(_fd_theta(space, z, X))


def metric_g(space, z, X, Y, method="auto"):
    """Symmetrized second kernel derivative (L_Y R_X + L_X R_Y) K(z,z) / 2."""
    if method not in ("auto", "closed", "fd"):
        raise ValueError("method must be auto, closed or fd")
    if method == "closed" or (method == "auto" and _closed_available(space, z)):
        return (complex(space.mixed_form(z, X, Y)) + complex(space.mixed_form(z, Y, X))) / 2.0
    return (fd_LR(space, z, X, Y) + fd_LR(space, z, Y, X)) / 2.0


def two_form_omega(space, z, X, Y, method="auto"):
    """Antisymmetric part L_X R_Y K - L_Y R_X K at the diagonal point.

    For constant fields this is the value of the exterior derivative of
    theta; the bracket term of the general formula vanishes.
    """
    if method not in ("auto", "closed", "fd"):
        raise ValueError("method must be auto, closed or fd")
    if method == "closed" or (method == "auto" and _closed_available(space, z)):
        return complex(space.mixed_form(z, X, Y)) - complex(space.mixed_form(z, Y, X))
    return fd_LR(space, z, X, Y) - fd_LR(space, z, Y, X)


@dataclass
class GeometryReport:
    """Closed-form vs finite-difference cross-validation at one sample."""

    g_closed: complex
    g_fd: complex
    theta_closed: complex
    theta_fd: complex
    omega_closed: complex
    omega_fd: complex
    rel_discrepancies: tuple
    provenance: str = "closed"


def geometry_report(space, z, X, Y):
    """Compare closed-form g, theta, omega against the FD oracle at (z, X, Y)."""
    g_fd = (fd_LR(space, z, X, Y) + fd_LR(space, z, Y, X)) / 2.0
    th_fd = _fd_theta(space, z, X)
    om_fd = fd_LR(space, z, X, Y) - fd_LR(space, z, Y, X)
    if _closed_available(space, z):
        prov = "closed"
        g_cl = metric_g(space, z, X, Y, method="closed")
        th_cl = one_form_theta(space, z, X, method="closed")
        om_cl = two_form_omega(space, z, X, Y, method="closed")
    else:
        prov = "fd"
        g_cl, th_cl, om_cl = g_fd, th_fd, om_fd
    rel = tuple(
        abs(c - f) / max(1.0, abs(f))
        for c, f in ((g_cl, g_fd), (th_cl, th_fd), (om_cl, om_fd))
    )
    return GeometryReport(g_cl, g_fd, th_cl, th_fd, om_cl, om_fd, rel, prov)


def infinitesimal_cs_margin(space, z, X, method="auto"):
    """K(z,z) L_X R_X K(z,z) - |R_X K(z,z)|^2 at the diagonal point.

    Nonnegative (up to -1e-8 * scale) in any coherent space, with equality
    exactly on rank-one kernels such as schur("mobius").  The equality case
    is why closed forms are preferred when the space has them: finite
    differences carry ~1e-6 noise, which lands on either side of an exact
    zero.  method="fd" forces the definitional evaluation.
    """
    if method == "fd" or (method == "auto" and not _closed_available(space, z)):
        lr = fd_LR(space, z, X, X).real
        th = _fd_theta(space, z, X)
    else:
        lr = complex(space.mixed_form(z, X, X)).real
        th = complex(space.theta_form(z, X))
    k = complex(space.kernel(z, z)).real
    return k * lr - abs(th) ** 2


def wtg_matrix(space, z, X, method="auto"):
    """2x2 matrix [[K, R_X K], [L_X K, L_X R_X K]] at (z, z); PSD for any X.

    Closed-form entries when available (see infinitesimal_cs_margin for
    why), FD otherwise.
    """
    if method == "fd" or (method == "auto" and not _closed_available(space, z)):
        th = _fd_theta(space, z, X)
        lr = fd_LR(space, z, X, X)
    else:
        th = complex(space.theta_form(z, X))
        lr = complex(space.mixed_form(z, X, X))
    k = complex(space.kernel(z, z))
    return np.array([[k, th], [np.conj(th), lr]], dtype=complex)


@dataclass
class PotentialReport:
    """Signed margins of the log-kernel derivative inequalities."""

    fbar_residual: float
    rerr_margin: float
    rell_margin: float
    ifcs_margin: float
    worst: float
    skipped: bool = False


def potential_inequality_check(space, z, X, h=None):
    """Check the derivative inequalities of the potential P = log K.

    Verifies, by finite differences along the same chart paths,
    L_X P = conj(R_X P), 2 Re R_X^2 P <= (L_X + R_X)^2 P,
    2 Re L_X^2 P <= (L_X + R_X)^2 P and L_X R_X P >= 0.  If the kernel
    vanishes anywhere on the probe stencil, the report comes back skipped.

    The step default is 1e-4 rather than the first-derivative 1e-5:
    second differences divide roundoff by h^2, and log-linear potentials
    (Klauder, rank-one Schur kernels) satisfy the inequalities with
    equality, so the noise floor has to sit well below 1e-6.
    """
    if h is None:
        h = 1e-4 * _point_scale(z)

    def pot(a, b):
        k = space.kernel(a, b)
        if abs(k) < 1e-300:
            raise ZeroDivisionError
        return np.log(complex(k))

    try:
        lp = fd_L(space, pot, z, z, X, h=h)
        rp = fd_R(space, pot, z, z, X, h=h)
        lrp = fd_LR(space, z, X, X, f=pot, h=h)

        def second(g, step):
            return (g(step) - 2.0 * g(0.0) + g(-step)) / (step * step)

        def rr(step):
            return pot(z, space.chart_path(z, X, step))

        def ll(step):
            return pot(space.chart_path(z, X, step), z)

        def diag(step):
            w = space.chart_path(z, X, step)
            return pot(w, w)

        r2 = _richardson(second(rr, h), second(rr, h / 2.0))
        l2 = _richardson(second(ll, h), second(ll, h / 2.0))
        both2 = _richardson(second(diag, h), second(diag, h / 2.0))
    except ZeroDivisionError:
        nan = float("nan")
        return PotentialReport(nan, nan, nan, nan, nan, skipped=True)

    fbar = abs(lp - np.conj(rp))
    rerr = both2.real - 2.0 * r2.real
    rell = both2.real - 2.0 * l2.real
    ifcs = lrp.real
    return PotentialReport(fbar, rerr, rell, ifcs, min(rerr, rell, ifcs))


def commutation_check(space, z, zp, X, Y, h=None):
    """|L_X R_Y K - R_Y L_X K| via genuinely nested finite differences.

    The two orders use swapped inner/outer steps so the stencils differ;
    a symmetric four-point stencil would make the comparison vacuous.  The
    base step is 1e-4 (second-difference optimum) rather than the 1e-5 of
    the first-derivative oracle, whose roundoff would drown the bound.
    """
    if h is None:
        h = 1e-4 * max(_point_scale(z), _point_scale(zp))
    h_in = 0.7 * h

    def lr(step_l, step_r):
        def inner(a, b):
            return (space.kernel(a, space.chart_path(b, Y, step_r))
                    - space.kernel(a, space.chart_path(b, Y, -step_r))) / (2.0 * step_r)

        return (inner(space.chart_path(z, X, step_l), zp)
                - inner(space.chart_path(z, X, -step_l), zp)) / (2.0 * step_l)

    def rl(step_l, step_r):
        def inner(a, b):
            return (space.kernel(space.chart_path(a, X, step_l), b)
                    - space.kernel(space.chart_path(a, X, -step_l), b)) / (2.0 * step_l)

        return (inner(z, space.chart_path(zp, Y, step_r))
                - inner(z, space.chart_path(zp, Y, -step_r))) / (2.0 * step_r)

    return abs(lr(h, h_in) - rl(h, h_in))
