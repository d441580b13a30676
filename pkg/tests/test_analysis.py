from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relay_iabc import analysis as an
from relay_iabc.engine import PhaseRecord, run
from relay_iabc.graph import Partition
from relay_iabc.protocol import PhaseUpdate
from tests.conftest import make_config


def delta_oracle(A):
    A = np.asarray(A, float)
    n = A.shape[0]
    return max(abs(A[i, j] - A[k, j]) for j in range(A.shape[1]) for i in range(n) for k in range(n))


def lambda_oracle(A):
    A = np.asarray(A, float)
    n = A.shape[0]
    return 1 - min(sum(min(A[i, j], A[k, j]) for j in range(A.shape[1]))
                   for i in range(n) for k in range(n))


def stochastic(n, cols=None):
    cols = cols or n
    return st.lists(st.lists(st.floats(0.0, 1.0), min_size=cols, max_size=cols)
                    .filter(lambda r: sum(r) > 1e-3), min_size=n, max_size=n) \
        .map(lambda rows: np.array([np.array(r) / sum(r) for r in rows]))


class TestCoefficients:
    def test_examples(self):
        assert an.dobrushin_delta([[0.5, 0.5], [0.0, 1.0]]) == 0.5
        assert an.lambda_coefficient([[0.5, 0.5], [0.0, 1.0]]) == 0.5
        assert an.dobrushin_delta(np.eye(3)) == 1.0
        assert an.lambda_coefficient(np.eye(3)) == 1.0
        same = [[0.2, 0.3, 0.5]] * 3
        assert an.dobrushin_delta(same) == 0.0
        assert an.lambda_coefficient(same) == pytest.approx(0.0)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            an.dobrushin_delta([[0.5, 0.6], [0, 1]])
        with pytest.raises(ValueError):
            an.lambda_coefficient([[1.2, -0.2], [0, 1]])

    @settings(max_examples=60)
    @given(stochastic(4))
    def test_match_brute_force(self, A):
        assert an.dobrushin_delta(A) == pytest.approx(delta_oracle(A), abs=1e-12)
        assert an.lambda_coefficient(A) == pytest.approx(lambda_oracle(A), abs=1e-12)
        assert 0.0 <= an.dobrushin_delta(A) <= 1.0 + 1e-12

    @settings(max_examples=60)
    @given(stochastic(4), stochastic(4))
    def test_submultiplicative(self, A, B):
        assert an.dobrushin_delta(A @ B) <= an.lambda_coefficient(A) * an.dobrushin_delta(B) + 1e-9


class TestStructureChecks:
    def test_scrambling(self):
        M = [[.5, .5, 0], [.5, .5, 0], [0, .5, .5]]
        assert an.is_scrambling(M, 0.4)
        assert not an.is_scrambling(np.eye(3), 0.4)

    def test_L2(self):
        beta = 0.25
        good = [[.5, .5, 0], [0, .5, .5], [.5, 0, .5]]
        assert an.check_L2(good, 1, beta)
        assert not an.check_L2([[.5, .4, .1], [0, .5, .5], [.5, 0, .5]], 1, beta)
        assert not an.check_L2(np.eye(3), 1, beta)
        with pytest.raises(ValueError):
            an.check_L2(good, 0, beta)

    def test_L1_and_T1(self):
        beta = 0.25
        M = np.array([[.5, .5, 0], [0, .5, .5], [.5, 0, .5]])
        assert an.check_L1(M, M, 1, beta)
        assert an.check_T1(M, M, M, beta)
        I = np.eye(3)
        assert not an.check_L1(I, I, 1, beta)
        assert not an.check_T1(I, I, I, beta)

    def test_cumulative_deltas(self):
        M = np.array([[.5, .5], [0.0, 1.0]])
        assert an.cumulative_deltas([M, M]) == pytest.approx([0.5, 0.25])


def _record(values, retained, new, honest=(0, 1, 2)):
    u = PhaseUpdate(0, 0, values, retained, new)
    return PhaseRecord(0, tuple(honest), np.zeros(len(honest)), np.array([new]), [u])


class TestExtraction:
    def test_bracketed_byzantine_value(self):
        # m=5, b=1: node 0 keeps {10, 15 (byz), 20}
        part = Partition(5, (3, 4))
        vals = [(0, 10.0, True), (1, 20.0, True), (2, 99.0, True), (3, 15.0, True), (4, -99.0, True)]
        rec = _record(vals, [0, 1, 3], 15.0)
        M = an.extract_phase_matrix(rec, part)
        w = 1 / 3
        assert M.rows[0] == pytest.approx([w + 0.5 * w, w + 0.5 * w, 0.0])
        assert M.rows[0] @ np.array([10.0, 20.0, 99.0]) == pytest.approx(15.0)

    def test_equal_brackets_put_all_weight_on_lowest_id(self):
        part = Partition(4, (3,))
        vals = [(0, 5.0, True), (1, 5.0, True), (2, 9.0, True), (3, 5.0, True)]
        M = an.extract_phase_matrix(_record(vals, [0, 1, 3], 5.0), part)
        assert M.rows[0] == pytest.approx([2 / 3, 1 / 3, 0.0])

    def test_unbracketed_value_raises(self):
        part = Partition(4, (3,))
        vals = [(0, 1.0, True), (1, 2.0, True), (2, 3.0, True), (3, 50.0, True)]
        with pytest.raises(an.ExtractionError):
            an.extract_phase_matrix(_record(vals, [1, 2, 3], 18.0), part)

    def test_stale_honest_value_treated_as_foreign(self):
        part = Partition(4, (3,))
        vals = [(0, 0.0, True), (1, 6.0, False), (2, 8.0, True), (3, 9.0, True)]
        M = an.extract_phase_matrix(_record(vals, [0, 1, 2], 14 / 3), part)
        assert M.rows[0, 1] == 0.0
        assert M.rows[0] @ np.array([0.0, 6.0, 8.0]) == pytest.approx(14 / 3)

    @pytest.mark.parametrize("kind", ["RandomRange", "Equivocator", "Replayer", "Silent"])
    def test_real_runs_are_sound(self, kind):
        cfg = make_config(adversary={"*": {"kind": kind}}, iterations=15, algorithm="relay")
        tr = run(cfg, record_phases=True)
        mats = an.extract_all(tr.phases["relay"], tr.scenario.partition)
        for M, r in zip(mats, tr.phases["relay"]):
            assert M.is_row_stochastic()
            assert an.state_consistency_check(M, r.before, r.after)

    def test_consistency_check_detects_perturbation(self):
        tr = run(make_config(iterations=3, algorithm="relay"), record_phases=True)
        M = an.extract_all(tr.phases["relay"], tr.scenario.partition)[1]
        r = tr.phases["relay"][1]
        bad = M.rows.copy()
        bad[0, 0] += 1e-3
        bad[0, 1] -= 1e-3
        assert an.state_consistency_check(M, r.before, r.after)
        assert not an.state_consistency_check(bad, r.before, r.after)


class TestRateBounds:
    def test_small_cases(self):
        rb = an.compare_rate_bounds(3, 1, 1)
        assert (rb.tau, rb.exponent_relay, rb.exponent_iabc) == (8, 3, 24)
        assert rb.beta == Fraction(1, 4)
        assert rb.bound_relay == 1 - Fraction(1, 4) ** 3
        assert rb.bound_relay < rb.bound_iabc

    def test_b2(self):
        rb = an.compare_rate_bounds(5, 2, 2)
        assert (rb.tau, rb.exponent_relay, rb.exponent_iabc) == (7776, 6, 38880)
        assert rb.bound_relay < rb.bound_iabc
        lr, li = rb.log10_gap()
        assert lr > li

    def test_equal_exponents_give_equal_bounds(self):
        rb = an.compare_rate_bounds(3, 1, 8)
        assert rb.bound_relay == rb.bound_iabc

    def test_requires_h_2b_plus_1(self):
        with pytest.raises(ValueError):
            an.compare_rate_bounds(4, 1, 1)


def test_matrix_json_round_trip():
    tr = run(make_config(iterations=5, algorithm="relay"), record_phases=True)
    mats = an.extract_all(tr.phases["relay"], tr.scenario.partition)
    text = an.dump_matrices(mats, 5, 2, an.beta_for(7, 2))
    meta, back = an.load_matrices(text)
    assert meta == {"h": 5, "b": 2, "beta": 1 / 6}
    for a, b in zip(mats, back):
        assert a.t == b.t and np.array_equal(a.rows, b.rows)
