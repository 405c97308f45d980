import json
import math

import numpy as np
import pytest

from fexp.errors import DomainError, NumericalError
from fexp.gaussian import ChannelParams
from fexp.verify import ToyEncoders, TypicalSetParams, quadrature_lemma_checks_n1
from fexp.verify import lemmas
from fexp.verify.suite import SuiteSize, mc_agreement_check, quadrature_check, run_bound_suite

CHECKS = ("p1y_peak_bound", "p0z_peak_bound", "marginal_pz_bound", "p0y_lower_bound",
          "likelihood_ratio_lower_bound", "error_mass_transfer", "ratio_floor_joint")


def test_zero_encoder_n1(ones):
    enc = ToyEncoders.zero(1)
    rep = quadrature_lemma_checks_n1(enc, ones, TypicalSetParams(1.0, 0.5, 1.0, 0.5))
    assert rep["all_passed"]
    # p_1(y) is N(0, 1), so its peak equals the bound to quadrature accuracy
    assert abs(rep["p1y_peak_bound"]["min_margin"]) < 1e-9
    assert rep["p1y_peak_bound"]["points"] >= 100


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_encoder_n1(seed):
    rng = np.random.default_rng(seed)
    p = ChannelParams(*rng.uniform(0.3, 3, 4))
    enc = ToyEncoders.random(1, rng, fb_power=p.p_fb)
    x0 = abs(float(enc.forward(0, np.zeros(1))[0]))
    ts = TypicalSetParams(2.0, 0.5 * math.sqrt(p.p_fb), 1.5, x0 + 0.3)
    rep = quadrature_lemma_checks_n1(enc, p, ts)
    for k in CHECKS:
        assert rep[k]["passed"], (k, rep[k])
        assert rep[k]["min_margin"] >= -lemmas.MARGIN_TOL
    for k in CHECKS[:5]:
        assert rep[k]["points"] >= 100


def test_marginal_is_a_density(ones):
    rng = np.random.default_rng(7)
    enc = ToyEncoders.random(1, rng, fb_power=1.0)
    m = lemmas._N1(enc, ones)
    # integrate the quadrature marginal p_0(z) over the line
    total = lemmas._quad(lambda z: m.p_z(0, z), -25, 25, [0.0], "mass")
    assert total == pytest.approx(1.0, rel=1e-7)
    assert m.prob_y(1, -40, 40) == pytest.approx(1.0, rel=1e-7)


def test_empty_tz0_makes_checks_vacuous(ones):
    enc = ToyEncoders(1, np.array([[2.0], [-2.0]]), np.zeros((2, 1, 1)), 3.0,
                      np.array([[0.5]]), 1.0)
    rep = quadrature_lemma_checks_n1(enc, ones, TypicalSetParams(1.0, 1.0, 1.0, 1.0))
    assert rep["all_passed"]
    assert rep["p0y_lower_bound"]["min_margin"] == math.inf


def test_validation(ones):
    with pytest.raises(DomainError):
        quadrature_lemma_checks_n1(ToyEncoders.zero(2), ones, TypicalSetParams(1, 1, 1, 1))
    with pytest.raises(DomainError):
        quadrature_lemma_checks_n1(ToyEncoders.zero(1, 2.0), ones, TypicalSetParams(1, 1, 1, 1))
    with pytest.raises(DomainError):
        quadrature_lemma_checks_n1(ToyEncoders.zero(1), ones, TypicalSetParams(1, 1, 1, 1), 50)


def test_quadrature_failure_raises_with_diagnostics():
    with pytest.raises(NumericalError) as e:
        lemmas._quad(lambda x: 1.0 / abs(x) ** 1.01 if x else 0.0, -1, 1, (), "singular")
    assert "abs_err" in e.value.diagnostics


def test_quick_suite_report_is_json():
    rep = run_bound_suite(11, SuiteSize.quick())
    assert rep["passed"]
    text = json.dumps(rep, sort_keys=True)
    assert json.loads(text)["checks"]["quadrature_n1"]["passed"]


def test_quadrature_suite_slice():
    assert quadrature_check(np.random.default_rng(9), 2)["passed"]


def test_mc_agreement_small():
    r = mc_agreement_check(0, 100_000)
    assert r["passed"] and len(r["cases"]) == 4
