import json

import pytest

from jetvar import cli
from jetvar.contactforms import ContactForm
from jetvar.model import corpus_dir, corpus_models, load

CORPUS = corpus_dir()


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def lines(out):
    return out.strip().splitlines()


def test_el_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "el", CORPUS / "harmonic_oscillator.model")
    assert code == 0 and "delta[q] = -q[t,t] - q" in lines(out)
    code, out, _ = run(capsys, "el", CORPUS / "potential_kdv.model")
    assert "delta[phi] = phi[t,x] + phi[x,x,x,x] + 6*phi[x]*phi[x,x]" in lines(out)
    zero = tmp_path / "zero.model"
    zero.write_text('base = ["t"]\nfields = ["q"]\nlagrangian = "0"\n')
    code, out, _ = run(capsys, "el", zero)
    assert code == 0 and "delta[q] = 0" in lines(out)


def test_symmetry_examples(capsys):
    code, out, _ = run(capsys, "symmetry", CORPUS / "free_particle.model", "--name", "boost")
    assert code == 0
    assert "verdict: divergence symmetry" in lines(out) and "sigma[t] = q" in lines(out)
    code, out, _ = run(capsys, "symmetry", CORPUS / "kepler.model", "--name", "rotation")
    assert code == 0 and "verdict: exact symmetry" in lines(out)
    code, out, _ = run(capsys, "symmetry", CORPUS / "kepler_2d.model", "--name", "rotation")
    assert code == 0 and "verdict: exact symmetry" in lines(out)
    code, out, _ = run(capsys, "symmetry", CORPUS / "harmonic_oscillator.model", "--name", "scaling")
    assert code == 1
    assert "verdict: not a symmetry" in lines(out) and "residual[q] = -2*q[t,t] - 2*q" in lines(out)


def test_noether_examples(capsys):
    code, out, _ = run(capsys, "noether", CORPUS / "harmonic_oscillator.model", "--name", "time")
    assert code == 0
    assert "current[t] = -1/2*q[t]^2 - 1/2*q^2" in lines(out) and "residual = 0" in lines(out)
    code, out, _ = run(capsys, "noether", CORPUS / "kepler.model", "--name", "runge_lenz_1")
    assert code == 0 and "residual = 0" in lines(out)
    code, out, _ = run(capsys, "noether", CORPUS / "free_particle.model", "--name", "boost")
    assert "current[t] = t*q[t] - q" in lines(out)


def test_check_current(capsys):
    model = CORPUS / "harmonic_oscillator.model"
    code, out, _ = run(capsys, "noether", model, "--name", "time", "--check-current", "-1/2*q_t^2 - 1/2*q^2")
    assert code == 0 and "verdict: conserved" in lines(out)
    code, out, _ = run(capsys, "noether", model, "--name", "time", "--check-current", "-1/2*q_t^2 - 1/2*q^2 + q_t")
    assert code == 1 and "residual = q[t,t]" in lines(out) and "verdict: not conserved" in lines(out)


def test_check_current_errors(capsys):
    model = CORPUS / "wave_equation_2d.model"
    code, _, err = run(capsys, "noether", model, "--name", "t_translation", "--check-current", "u_t")
    assert code == 2 and "needs 2 expression" in err
    code, _, err = run(capsys, "noether", model, "--name", "t_translation", "--check-current", "u_t", "--check-current", "u_q")
    assert code == 2 and "#2" in err and "position" in err


def test_triviality_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "triviality", CORPUS / "trivial.model")
    assert code == 0 and "sigma[t] = 1/2*q[t]^2" in lines(out)
    code, out, _ = run(capsys, "triviality", CORPUS / "free_particle.model")
    assert code == 1 and "verdict: not variationally trivial" in lines(out)
    code, out, _ = run(capsys, "triviality", CORPUS / "trivial_2d.model")
    assert code == 0 and "sigma[t] = q^3" in lines(out) and "sigma[x] = q*u" in lines(out)


def test_usage_and_parse_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["el"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["symmetry", str(CORPUS / "kepler.model")])
    assert exc.value.code == 2
    bad = tmp_path / "bad.model"
    bad.write_text('base = ["t"]\nfields = ["q"]\nlagrangian = "q_t * (q"\n')
    code, _, err = run(capsys, "el", bad)
    assert code == 2 and "lagrangian" in err and "position" in err
    code, _, err = run(capsys, "symmetry", CORPUS / "kepler.model", "--name", "nope")
    assert code == 2 and "no symmetry 'nope'" in err
    code, _, err = run(capsys, "el", tmp_path / "missing.model")
    assert code == 2


def test_non_projectable_is_rejected(capsys, tmp_path):
    m = tmp_path / "np.model"
    m.write_text('base = ["t"]\nfields = ["q"]\nlagrangian = "q_t^2"\n[symmetries.bad]\nbase = { t = "q_t" }\n')
    code, _, err = run(capsys, "symmetry", m, "--name", "bad")
    assert code == 2 and "projectable" in err


def test_json_mirrors_text(capsys):
    model = CORPUS / "free_particle.model"
    _, text, _ = run(capsys, "report", model)
    code, out, _ = run(capsys, "report", model, "--json")
    objs = [json.loads(line) for line in out.strip().splitlines()]
    blocks = text.strip().split("\n\n")
    assert len(objs) == len(blocks)
    for obj, block in zip(objs, blocks):
        assert f"command: {obj['command']}" in block
        assert f"input-sha256: {obj['input_sha256']}" in block
        for k, v in obj["expressions"].items():
            assert f"{k} = {v}" in block
    boost = next(o for o in objs if o["command"] == "symmetry boost")
    assert boost["verdict"] == "divergence symmetry" and boost["expressions"]["sigma[t]"] == "q"


@pytest.mark.parametrize("path", corpus_models(), ids=lambda p: p.stem)
def test_golden_certificates(path):
    expected = (path.parent / "expected" / f"{path.stem}.txt").read_text()
    got = cli.render(cli.report(load(path)), False)
    assert got == expected


def test_output_is_deterministic(capsys):
    model = CORPUS / "potential_kdv.model"
    first = run(capsys, "report", model, "--json")
    second = run(capsys, "report", model, "--json")
    assert first == second


def test_selftest_small(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "3", "--scale", "0.1")
    assert code == 0
    assert "all " in out and "invariants hold (seed 3)" in out
    again = run(capsys, "selftest", "--seed", "3", "--scale", "0.1")
    assert again == (code, out, "")


def test_selftest_json_and_suite_filter(capsys):
    code, out, _ = run(capsys, "selftest", "--suite", "rho_dH", "--suite", "h0_d", "--scale", "0.1", "--json")
    rows = [json.loads(x) for x in out.strip().splitlines()]
    assert code == 0 and [r["invariant"] for r in rows] == ["rho_dH", "h0_d"]
    with pytest.raises(SystemExit):
        cli.main(["selftest", "--suite", "nope"])


def test_selftest_names_flipped_sign_convention(capsys, monkeypatch):
    original = ContactForm.omega_lam

    def flipped(cls, spec, lam):
        return -original(spec, lam)

    monkeypatch.setattr(ContactForm, "omega_lam", classmethod(flipped))
    code, out, _ = run(capsys, "selftest", "--scale", "0.1")
    assert code == 1
    failing = out.strip().splitlines()[-1]
    assert failing.startswith("failing invariants:")
    assert "first_variation" in failing and "golden:harmonic_oscillator" in failing


def test_selftest_names_flipped_euler_lagrange_sign(capsys, monkeypatch):
    from jetvar import jetops, randomized

    original = jetops.euler_lagrange

    def flipped(L, spec=None):
        E = original(L, spec)
        return jetops.SourceForm(E.spec, tuple(-c for c in E.components))

    monkeypatch.setattr(randomized, "euler_lagrange", flipped)
    code, out, _ = run(capsys, "selftest", "--suite", "el_dual_path", "--scale", "0.1")
    assert code == 1 and "FAIL  el_dual_path" in out
