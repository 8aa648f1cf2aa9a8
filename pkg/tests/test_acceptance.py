"""Acceptance checks, one per criterion, each at exact symbolic zero.

Every test records a PASS/FAIL line; the lines are echoed in the pytest
terminal summary (see conftest.py) and printed directly under ``-s``.
"""
import random
from fractions import Fraction

from jetvar.jetops import euler_lagrange
from jetvar.model import corpus_dir, load
from jetvar.randomized import SUITES, run_suite
from jetvar.symexpr import Expr, parse
from jetvar.symmetry import (
    DIVERGENCE,
    EXACT,
    NOT_SYMMETRY,
    GeneralizedVectorField,
    characteristic_check,
    noether_current,
    verify_conservation,
)

SEED = 0
LINES: list = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)


def run(names, minimum):
    results = [run_suite(name, SEED, max(minimum, SUITES[name][1])) for name in names]
    failed = [f"{r.name} ({r.failures}/{r.cases}: {r.first_failure})" for r in results if not r.ok]
    summary = ", ".join(f"{r.name}={r.cases}" for r in results)
    return results, failed, summary


def model(stem):
    return load(corpus_dir() / f"{stem}.model")


def test_operator_identities():
    names = ["dH_squared", "dV_squared", "dH_dV_anticommute", "h0_d", "rho_idempotent", "rho_dH", "delta_dH"]
    results, failed, summary = run(names, 200)
    ok = not failed and all(r.cases >= 200 for r in results)
    record(1, ok, f"operator identities, seed {SEED}: {summary}" + (f"; failed {failed}" if failed else ""))
    assert ok, failed


def test_euler_lagrange_two_ways():
    results, failed, summary = run(["el_dual_path"], 100)
    ok = not failed and results[0].cases >= 100
    record(2, ok, f"rho(dL) against the direct sum: {summary}")
    assert ok, failed


def test_first_variation_decomposition():
    results, failed, summary = run(["first_variation"], 100)
    ok = not failed and results[0].cases >= 100
    record(3, ok, f"three-piece decomposition incl. non-projectable and order-2 fields: {summary}")
    assert ok, failed


def _corpus_checks():
    problems = []

    def need(cond, what):
        if not cond:
            problems.append(what)

    # harmonic oscillator, time translation: J = L - q_t dL/dq_t = -(energy)
    m = model("harmonic_oscillator")
    P = lambda s: parse(s, m.spec)
    sym = m.symmetry("time")
    rep = characteristic_check(sym.field, m.lagrangian)
    need(rep.verdict == EXACT, "oscillator time translation is not exact")
    J = noether_current(sym.field, m.lagrangian)
    need(J.components[0] == P("-1/2*q_t^2 - 1/2*q^2"), "oscillator current is not minus the energy")
    need(verify_conservation(sym.field, m.lagrangian, J).residual.is_zero(), "oscillator residual nonzero")

    # free particle, Galilean boost
    m = model("free_particle")
    P = lambda s: parse(s, m.spec)
    sym = m.symmetry("boost")
    rep = characteristic_check(sym.field, m.lagrangian)
    need(rep.verdict == DIVERGENCE, "boost is not a divergence symmetry")
    need(rep.sigma is not None and rep.sigma[0] == P("q"), "boost sigma is not q")
    J = noether_current(sym.field, m.lagrangian, rep.sigma)
    need(J.components[0] == P("t*q_t - q"), "boost current is not t*q_t - q")
    need(verify_conservation(sym.field, m.lagrangian, J).residual.is_zero(), "boost residual nonzero")

    # planar Kepler, Cartesian: rotation gives the angular momentum
    m = model("kepler_2d")
    P = lambda s: parse(s, m.spec)
    sym = m.symmetry("rotation")
    J = noether_current(sym.field, m.lagrangian)
    need(J.components[0] == P("q1*q2_t - q2*q1_t"), "rotation current is not the angular momentum")
    need(verify_conservation(sym.field, m.lagrangian, J).residual.is_zero(), "rotation residual nonzero")

    # planar Kepler, polar: Runge-Lenz components from A = p x L - r/|r|
    m = model("kepler")
    P = lambda s: parse(s, m.spec)
    expected = {
        "runge_lenz_1": "r^2*phi_t*(r_t*sin_phi + r*phi_t*cos_phi) - cos_phi",
        "runge_lenz_2": "-r^2*phi_t*(r_t*cos_phi - r*phi_t*sin_phi) - sin_phi",
    }
    for name, src in expected.items():
        sym = m.symmetry(name)
        need(sym.field.jet_order() == 1, f"{name} is not a generalized field")
        rep = characteristic_check(sym.field, m.lagrangian)
        need(rep.is_symmetry, f"{name} fails the characteristic equation")
        J = noether_current(sym.field, m.lagrangian, rep.sigma)
        need(J.components[0] == P(src), f"{name} current is not the Runge-Lenz component")
        need(verify_conservation(sym.field, m.lagrangian, J).residual.is_zero(), f"{name} residual nonzero")

    # potential KdV
    m = model("potential_kdv")
    P = lambda s: parse(s, m.spec)
    E = euler_lagrange(m.lagrangian)
    need(E[0] == P("phi_tx + 6*phi_x*phi_xx + phi_xxxx"), "KdV Euler-Lagrange expression differs")
    sym = m.symmetry("third_order")
    need(sym.field.jet_order() == 3, "KdV symmetry is not of jet order 3")
    rep = characteristic_check(sym.field, m.lagrangian)
    need(rep.is_symmetry, "KdV third-order field fails the characteristic equation")
    J = noether_current(sym.field, m.lagrangian, rep.sigma)
    need(verify_conservation(sym.field, m.lagrangian, J).residual.is_zero(), "KdV residual nonzero")
    return problems


def test_corpus_certificates():
    problems = _corpus_checks()
    record(4, not problems, "corpus: oscillator, boost, rotation, Runge-Lenz (polar), KdV" + (f"; {problems}" if problems else ""))
    assert not problems


def test_triviality_round_trip():
    results, failed, summary = run(["triviality_roundtrip"], 100)
    ok = not failed and results[0].cases >= 100
    record(5, ok, f"d_H sigma inverted and re-differentiated: {summary}")
    assert ok, failed


def test_master_identity():
    results, failed, summary = run(["master_classical", "master_generalized", "master_vertical_symmetry"], 50)
    ok = not failed and all(r.cases >= 50 for r in results)
    record(6, ok, f"master identity and closing relation: {summary}")
    assert ok, failed


def _perturbed_symmetries(cases: int) -> tuple:
    """Add a cubic vertical piece to a verified corpus symmetry; it must stop being one."""
    pool = []
    for stem in ("harmonic_oscillator", "free_particle", "kepler", "potential_kdv", "wave_equation_2d"):
        m = model(stem)
        for sym in m.symmetries.values():
            if characteristic_check(sym.field, m.lagrangian, sym.sigma).is_symmetry:
                pool.append((m, sym))
    rng = random.Random(f"perturb:{SEED}")
    missed = 0
    for _ in range(cases):
        m, sym = rng.choice(pool)
        spec = m.spec
        i = rng.randrange(spec.m)
        c = Expr.const(Fraction(rng.choice([-2, -1, 1, 3]), rng.choice([1, 2])))
        bump = c * spec.y(i) ** 3 * spec.x(rng.randrange(spec.n)) ** rng.randint(0, 1)
        fibre = list(sym.field.fibre)
        fibre[i] = fibre[i] + bump
        w = GeneralizedVectorField(spec, list(sym.field.base), fibre)
        rep = characteristic_check(w, m.lagrangian)
        if rep.verdict != NOT_SYMMETRY or all(r.is_zero() for r in rep.residual):
            missed += 1
    return len(pool), missed


def test_perturbations_are_detected():
    results, failed, summary = run(["falsifiability"], 50)
    pool, missed = _perturbed_symmetries(50)
    ok = not failed and results[0].cases >= 50 and missed == 0 and pool > 0
    record(7, ok, f"perturbed currents {summary}; perturbed symmetries 50 from {pool}, undetected {missed}")
    assert ok, (failed, missed)


def test_sign_flip_in_an_operator_breaks_the_suites(monkeypatch):
    """The identity suites are not vacuous: a wrong sign in omega_lam is caught."""
    from jetvar.contactforms import ContactForm

    original = ContactForm.omega_lam

    def flipped(cls, spec, lam):
        return -original(spec, lam)

    monkeypatch.setattr(ContactForm, "omega_lam", classmethod(flipped))
    r = run_suite("first_variation", SEED, 20)
    assert r.failures > 0
