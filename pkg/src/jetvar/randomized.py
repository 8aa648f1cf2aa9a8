"""Seeded random generators and the invariant suites run by tests and ``selftest``."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .contactforms import (
    ContactForm,
    d,
    d_H,
    d_V,
    density_form,
    form_to_source,
    h0,
    rho,
)
from .errors import JetvarError
from .jetops import (
    Lagrangian,
    euler_lagrange,
    invert_total_divergence,
    is_variationally_trivial,
    total_divergence,
)
from .multiindex import indices_up_to
from .symexpr import ONE, ZERO, BundleSpec, Expr, build_spec, expr_sum
from .symmetry import (
    GeneralizedVectorField,
    characteristic_check,
    first_variational_formula,
    lie_derivative_form,
    master_identity_check,
    noether_current,
    verify_conservation,
)

BASE_NAMES = ("t", "x")
FIELD_NAMES = ("u", "v")
_TRIG = {"c": {"derivatives": {"t": "-s"}}, "s": {"derivatives": {"t": "c"}}}


# generators ---------------------------------------------------------------


def random_spec(rng: random.Random, n: int | None = None, m: int | None = None, atoms: bool = False) -> BundleSpec:
    n = n if n is not None else rng.randint(1, 2)
    m = m if m is not None else rng.randint(1, 2)
    return build_spec(
        list(BASE_NAMES[:n]), list(FIELD_NAMES[:m]), dict(_TRIG) if atoms and n == 1 else {}
    )


def _coefficient(rng: random.Random) -> Fraction:
    num = rng.choice([-3, -2, -1, 1, 1, 2, 3])
    return Fraction(num, rng.choice([1, 1, 1, 2, 3]))


def jet_pool(spec: BundleSpec, order: int) -> list:
    return [spec.y(i, lam) for i in range(spec.m) for lam in indices_up_to(spec.n, order)]


def random_monomial(
    rng: random.Random, pool: list, max_factors: int = 3
) -> Expr:
    out = Expr.const(_coefficient(rng))
    for _ in range(rng.randint(1, max_factors)):
        out = out * rng.choice(pool)
    return out


def random_poly(
    rng: random.Random,
    spec: BundleSpec,
    order: int,
    terms: int = 3,
    base: bool = True,
    jets: bool = True,
    max_factors: int = 3,
) -> Expr:
    """Nonzero polynomial in jets up to ``order`` and (optionally) base coordinates."""
    pool = jet_pool(spec, order) if jets else []
    if base:
        pool += [spec.x(lam) for lam in range(spec.n)]
    if not pool:
        return Expr.const(_coefficient(rng))
    while True:
        out = expr_sum(random_monomial(rng, pool, max_factors) for _ in range(rng.randint(1, terms)))
        if not out.is_zero():
            return out


def random_form(rng: random.Random, spec: BundleSpec, order: int, k: int, s: int, terms: int = 2) -> ContactForm:
    gens = [(i, lam) for i in range(spec.m) for lam in indices_up_to(spec.n, order)]
    out = ContactForm(spec)
    if k > len(gens) or s > spec.n:
        return out
    while out.is_zero():
        for _ in range(rng.randint(1, terms)):
            thetas = rng.sample(gens, k)
            dxs = rng.sample(range(spec.n), s)
            coef = random_poly(rng, spec, order, terms=2, max_factors=2)
            out = out + ContactForm.from_monomial(spec, thetas, dxs, coef)
    return out


def random_mixed_form(rng: random.Random, spec: BundleSpec, order: int) -> ContactForm:
    """Sum of pieces of several bidegrees, so projections have work to do."""
    out = ContactForm(spec)
    for _ in range(rng.randint(1, 3)):
        out = out + random_form(rng, spec, order, rng.randint(0, 2), rng.randint(0, spec.n), terms=1)
    return out


def random_lagrangian(rng: random.Random, spec: BundleSpec, order: int = 2, autonomous: bool = False) -> Lagrangian:
    while True:
        dens = random_poly(rng, spec, rng.randint(1, order), terms=3, base=not autonomous)
        L = Lagrangian(spec, dens)
        if not euler_lagrange(L).is_zero():
            return L


def random_vector_field(rng: random.Random, spec: BundleSpec, kind: str, order: int = 2) -> GeneralizedVectorField:
    """``kind`` is one of classical, projectable, vertical, nonprojectable."""
    n, m = spec.n, spec.m

    def sparse(gen):
        return gen() if rng.random() < 0.7 else ZERO

    if kind == "classical":
        base = [sparse(lambda: random_poly(rng, spec, 0, terms=2, jets=False, max_factors=2)) for _ in range(n)]
        fibre = [sparse(lambda: random_poly(rng, spec, 0, terms=2, max_factors=2)) for _ in range(m)]
    elif kind == "vertical":
        base = [ZERO] * n
        fibre = [sparse(lambda: random_poly(rng, spec, order, terms=2, max_factors=2)) for _ in range(m)]
        if all(spec.jet_order(f) == 0 for f in fibre):
            fibre[0] = fibre[0] + spec.y(0, list(indices_up_to(n, order))[-1])
    elif kind == "projectable":
        base = [sparse(lambda: random_poly(rng, spec, 0, terms=2, jets=False, max_factors=2)) for _ in range(n)]
        fibre = [sparse(lambda: random_poly(rng, spec, order, terms=2, max_factors=2)) for _ in range(m)]
    elif kind == "nonprojectable":
        base = [sparse(lambda: random_poly(rng, spec, 1, terms=2, max_factors=2)) for _ in range(n)]
        if not any(spec.has_jets(b) for b in base):
            base[0] = base[0] + spec.y(0)
        fibre = [sparse(lambda: random_poly(rng, spec, order, terms=2, max_factors=2)) for _ in range(m)]
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    return GeneralizedVectorField(spec, base, fibre)


def random_exact_sigma(rng: random.Random, spec: BundleSpec, order: int = 2) -> tuple:
    """Components sigma^lam; for n = 1 these may be rational or carry trig atoms."""
    comps = []
    for _ in range(spec.n):
        c = random_poly(rng, spec, order, terms=3)
        if spec.n == 1:
            extra = rng.choice(["none", "jet_den", "base_den", "atom", "atom"])
            if extra == "jet_den":
                c = c + random_poly(rng, spec, order, terms=2, max_factors=2) / (spec.y(0) ** 2 + ONE)
            elif extra == "base_den":
                c = c + random_poly(rng, spec, order, terms=2, max_factors=2) / (spec.x(0) ** 2 + ONE)
            elif extra == "atom" and spec.atoms:
                a = spec.atom(rng.choice(["c", "s"]))
                c = c + a * random_poly(rng, spec, order, terms=2, max_factors=2)
        comps.append(c)
    return tuple(comps)


# suites --------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    seconds: float
    first_failure: str = ""

    @property
    def ok(self) -> bool:
        return self.cases > 0 and self.failures == 0


def _run(name: str, cases: int, seed: int, body: Callable[[random.Random, int], bool | str]) -> SuiteResult:
    rng = random.Random(f"{name}:{seed}")
    failures = 0
    first = ""
    t0 = time.perf_counter()
    for k in range(cases):
        try:
            res = body(rng, k)
            msg = "" if res is True else (res or "identity violated")
        except JetvarError as exc:
            msg = f"{type(exc).__name__}: {exc}"
        if msg:
            failures += 1
            if not first:
                first = f"case {k}: {msg}"
    return SuiteResult(name, cases, failures, time.perf_counter() - t0, first)


def _spec_for(rng: random.Random, k: int) -> BundleSpec:
    # cycle through the four (n, m) shapes so every shape is covered
    n, m = [(1, 1), (1, 2), (2, 1), (2, 2)][k % 4]
    return random_spec(rng, n, m)


def _form_case(rng: random.Random, k: int) -> ContactForm:
    spec = _spec_for(rng, k)
    return random_mixed_form(rng, spec, rng.randint(0, 2))


def suite_dH_squared(rng, k):
    return d_H(d_H(_form_case(rng, k))).is_zero()


def suite_dV_squared(rng, k):
    return d_V(d_V(_form_case(rng, k))).is_zero()


def suite_anticommute(rng, k):
    phi = _form_case(rng, k)
    return (d_H(d_V(phi)) + d_V(d_H(phi))).is_zero()


def suite_h0_d(rng, k):
    phi = _form_case(rng, k)
    return (h0(d(phi)) - d_H(h0(phi))).is_zero()


def suite_rho_idempotent(rng, k):
    spec = _spec_for(rng, k)
    phi = random_form(rng, spec, rng.randint(0, 2), rng.randint(1, 2), spec.n)
    r = rho(phi)
    return (rho(r) - r).is_zero()


def suite_rho_dH(rng, k):
    spec = _spec_for(rng, k)
    phi = random_form(rng, spec, rng.randint(0, 2), rng.randint(1, 2), spec.n - 1)
    return rho(d_H(phi)).is_zero()


def suite_delta_dH(rng, k):
    spec = _spec_for(rng, k)
    sigma = [random_poly(rng, spec, rng.randint(0, 2), terms=3) for _ in range(spec.n)]
    return euler_lagrange(total_divergence(sigma, spec), spec).is_zero()


def suite_el_dual(rng, k):
    spec = _spec_for(rng, k)
    L = Lagrangian(spec, random_poly(rng, spec, rng.randint(1, 2), terms=4))
    via_rho = form_to_source(rho(d(density_form(L))))
    return (via_rho - euler_lagrange(L)).is_zero()


_FV_KINDS = ("projectable", "nonprojectable", "vertical", "classical")


def suite_first_variation(rng, k):
    spec = _spec_for(rng, k)
    kind = _FV_KINDS[(k // 4) % 4]
    order = 2 if kind in ("projectable", "vertical") else 1
    v = random_vector_field(rng, spec, kind, order)
    L = random_lagrangian(rng, spec, order=2 if spec.n == 1 else 1)
    fv = first_variational_formula(v, L, check=False)
    if kind == "nonprojectable" and fv.horizontal_term.is_zero() and not v.base[0].is_zero():
        return "non-projectable field gave an empty L d_V(v_H _| omega) term"
    return (fv.total() - lie_derivative_form(v, density_form(L))).is_zero()


def suite_triviality(rng, k):
    spec = random_spec(rng, n=1 + k % 2, m=1 + (k // 2) % 2, atoms=True)
    sigma = random_exact_sigma(rng, spec, order=2 if spec.n == 1 else 1)
    h = total_divergence(sigma, spec)
    if h.is_zero():
        return True
    if not is_variationally_trivial(Lagrangian(spec, h)):
        return "exact density reported nontrivial"
    back = invert_total_divergence(h, spec)
    return total_divergence(back, spec) == h


def suite_master_classical(rng, k):
    spec = _spec_for(rng, k)
    u = random_vector_field(rng, spec, "classical")
    L = random_lagrangian(rng, spec, order=2 if spec.n == 1 else 1)
    return master_identity_check(u, L, "classical").ok


def suite_master_generalized(rng, k):
    spec = _spec_for(rng, k)
    v = random_vector_field(rng, spec, "vertical", order=2 if spec.n == 1 else 1)
    L = random_lagrangian(rng, spec, order=2 if spec.n == 1 else 1)
    return master_identity_check(v, L, "generalized").ok


def suite_master_vertical_symmetry(rng, k):
    """Closing relation on vertical generalized symmetries of autonomous Lagrangians.

    For L free of base coordinates, Q^i = sum_lam c_lam y^i_lam is a symmetry;
    both sides of the relation must then vanish.
    """
    spec = _spec_for(rng, k)
    L = random_lagrangian(rng, spec, order=2 if spec.n == 1 else 1, autonomous=True)
    coeffs = [Fraction(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in range(spec.n)]
    fibre = [
        expr_sum(Expr.const(c) * spec.y(i, (lam,)) for lam, c in enumerate(coeffs))
        for i in range(spec.m)
    ]
    v = GeneralizedVectorField(spec, [ZERO] * spec.n, fibre)
    if not characteristic_check(v, L).is_symmetry:
        return "translation characteristic not recognised as a symmetry"
    cert = master_identity_check(v, L, "generalized")
    if not cert.lhs.is_zero():
        return "delta(L_v L) nonzero for a symmetry"
    return cert.ok


def suite_falsifiability(rng, k):
    """Start from a verified current, perturb one ingredient, demand a nonzero residual."""
    spec = _spec_for(rng, k)
    L = random_lagrangian(rng, spec, order=2 if spec.n == 1 else 1, autonomous=True)
    tau = [ONE] + [ZERO] * (spec.n - 1)
    v = GeneralizedVectorField(spec, tau, [ZERO] * spec.m)
    J = noether_current(v, L)
    if not verify_conservation(v, L, J).ok:
        return "unperturbed current failed"
    mode = k % 3
    if mode == 0:
        bump = random_poly(rng, spec, 1, terms=2, base=False)
        comps = list(J.components)
        comps[0] = comps[0] + bump
        cert = verify_conservation(v, L, comps)
    elif mode == 1:
        E = euler_lagrange(L)
        i = next(i for i in range(spec.m) if not E[i].is_zero())
        fibre = [ZERO] * spec.m
        fibre[i] = random_poly(rng, spec, 1, terms=2)
        w = GeneralizedVectorField(spec, [ZERO] * spec.n, fibre)
        cert = verify_conservation(v + w, L, J)
    else:
        cert = verify_conservation(v, L, [-c for c in J.components])
    return True if not cert.ok else "perturbation went undetected"


SUITES: dict[str, tuple[Callable, int, str]] = {
    "dH_squared": (suite_dH_squared, 200, "d_H d_H = 0"),
    "dV_squared": (suite_dV_squared, 200, "d_V d_V = 0"),
    "dH_dV_anticommute": (suite_anticommute, 200, "d_H d_V + d_V d_H = 0"),
    "h0_d": (suite_h0_d, 200, "h0 d = d_H h0"),
    "rho_idempotent": (suite_rho_idempotent, 200, "rho rho = rho"),
    "rho_dH": (suite_rho_dH, 200, "rho d_H = 0"),
    "delta_dH": (suite_delta_dH, 200, "delta d_H = 0"),
    "el_dual_path": (suite_el_dual, 100, "rho(dL) = Euler-Lagrange sum"),
    "first_variation": (suite_first_variation, 100, "three pieces sum to L_v L"),
    "triviality_roundtrip": (suite_triviality, 100, "d_H sigma inverts exactly"),
    "master_classical": (suite_master_classical, 50, "delta(L_u L) = L_u delta L"),
    "master_generalized": (suite_master_generalized, 50, "closing relation with correction"),
    "master_vertical_symmetry": (suite_master_vertical_symmetry, 50, "closing relation on generalized symmetries"),
    "falsifiability": (suite_falsifiability, 60, "perturbed currents leave residuals"),
}


def run_suite(name: str, seed: int = 0, cases: int | None = None) -> SuiteResult:
    body, default, _ = SUITES[name]
    return _run(name, default if cases is None else cases, seed, body)


def run_all(seed: int = 0, names: Iterable[str] | None = None, scale: float = 1.0) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        default = SUITES[name][1]
        out.append(run_suite(name, seed, max(1, int(default * scale))))
    return out
