import json
import math

import numpy as np
import pytest

from hessbound.bench import (
    AGGREGATE_HEADER,
    ClassLabel,
    FunctionCase,
    LABELS,
    Tally,
    aggregate,
    aggregate_csv,
    classify,
    parse_boxes,
    parse_corpus,
    random_boxes,
    ranking_csv,
    run_case,
    run_corpus,
    trials_csv,
)
from hessbound.codelist import parse
from hessbound.costmodel import count
from hessbound.errors import CorpusError, InconsistentBounds
from hessbound.interval import Box
from hessbound.spectral import Method, SpectralBounds

M, O, P, PP = ClassLabel.MINUS, ClassLabel.CIRCLE, ClassLabel.PLUS, ClassLabel.PLUS_PLUS


def sb(lo, hi, method=Method.ARITHMETIC):
    return SpectralBounds(lo, hi, method)


def tri(a, g, h):
    return sb(*a), sb(*g, Method.GERSHGORIN), sb(*h, Method.HERTZ_ROHN)


# --- random boxes -----------------------------------------------------------------


def test_random_boxes_deterministic_and_inside():
    dom = Box.from_bounds([-1, 0, 2], [1, 5, 3])
    a = random_boxes(dom, 50, seed=4)
    b = random_boxes(dom, 50, seed=4)
    assert [(x.lower.tolist(), x.upper.tolist()) for x in a] == [(x.lower.tolist(), x.upper.tolist()) for x in b]
    assert all(x.issubset(dom) for x in a)
    c = random_boxes(dom, 50, seed=5)
    assert any(not np.array_equal(x.lower, y.lower) for x, y in zip(a, c))


def test_random_boxes_of_point_domain():
    dom = Box.from_point([1.5, -2.0])
    for b in random_boxes(dom, 20, seed=0):
        assert b.lower.tolist() == [1.5, -2.0] and b.upper.tolist() == [1.5, -2.0]


def test_random_box_mean_width():
    boxes = random_boxes(Box.from_bounds([0, 0], [1, 1]), 10_000, seed=0)
    widths = np.array([b.upper - b.lower for b in boxes])
    assert np.all(np.abs(widths.mean(axis=0) - 1 / 3) < 0.02)


# --- classification ----------------------------------------------------------------


def test_classify_examples():
    assert classify(*tri((-19.904, 37.004), (-26.391, 38.587), (-20.597, 29.603))) == (PP, P)
    assert classify(*tri((-15.767, 19.27), (-15.767, 18.443), (-12.603, 14.278))) == (O, M)
    assert classify(*tri((-1, 2), (-1, 2), (-1, 2))) == (O, O)


def test_classify_every_label():
    g, h = (-10, 10), (-5, 5)
    assert classify(*tri((-11, 11), g, h)) == (M, M)
    assert classify(*tri((-7, 7), g, h)) == (P, P)
    assert classify(*tri((-5, 5), g, h)) == (P, P)
    assert classify(*tri((-3, 3), g, h)) == (PP, PP)


def test_classify_tolerance():
    g, h = (-10, 10), (-5, 5)
    assert classify(*tri((-10.0004, 9.9996), g, h)) == (O, O)
    assert classify(*tri((-10.0004, 9.9996), g, h), rel_tol=1e-12) == (M, P)


def test_classify_rejects_hertz_rohn_outside_gershgorin():
    with pytest.raises(InconsistentBounds):
        classify(*tri((-1, 1), (-1, 1), (-2, 1)))


# --- running cases -------------------------------------------------------------------

ILL2 = FunctionCase(
    "illustrative-2",
    3,
    Box.from_bounds([1, 0.5, 0.5], [2, 2, 2]),
    "x1/(x1 + 0.2*x2^2) - 2*x2/(x2 + 0.3*x3^3)",
)


def test_run_case_pinned_box():
    box = Box.from_bounds([1.5, 0.6, 1.0], [1.6, 1.1, 1.6])
    records, tally = run_case(ILL2, boxes=[box])
    (r,) = records
    for got, want in ((r.bounds_a, (-45.014, 17.624)), (r.bounds_g, (-40.725, 19.507)), (r.bounds_h, (-33.691, 18.897))):
        assert (got.lo, got.hi) == pytest.approx(want, abs=5e-4)
    assert (r.class_lo, r.class_hi) == (M, PP)
    assert tally.feasible == 1 and tally.lower[M] == 1 and tally.upper[PP] == 1
    assert r.oracle is not None and r.bounds_h.contains(r.oracle, tol=1e-9)


def test_run_case_affine():
    case = FunctionCase("affine", 2, Box.from_bounds([-1, -1], [1, 1]), "3*x1 - x2 + 1")
    records, tally = run_case(case, trials=15)
    assert len(records) == 15 and tally.feasible == 15
    for r in records:
        assert (r.class_lo, r.class_hi) == (O, O)
        assert tuple(r.bounds_a) == tuple(r.bounds_g) == tuple(r.bounds_h) == (0, 0)


def test_run_case_zero_trials():
    records, tally = run_case(ILL2, trials=0)
    assert records == [] and tally.feasible == tally.infeasible == 0
    assert all(v == 0 for v in (*tally.lower.values(), *tally.upper.values()))


def test_infeasible_pinned_box_is_recorded():
    case = FunctionCase("log", 1, Box.from_bounds([-1], [1]), "ln(x1)")
    records, tally = run_case(case, boxes=[Box.from_bounds([-1], [1]), Box.from_bounds([0.5], [1])])
    assert [r.feasible for r in records] == [False, True]
    assert (tally.feasible, tally.infeasible) == (1, 1)


def test_run_case_deterministic():
    a, _ = run_case(ILL2, trials=10, seed=3)
    b, _ = run_case(ILL2, trials=10, seed=3)
    assert trials_csv(a) == trials_csv(b)


# --- aggregation -------------------------------------------------------------------


def make_tally(name, n, lower, upper):
    t = Tally(name, n)
    t.lower.update(lower)
    t.upper.update(upper)
    t.feasible = sum(lower.values())
    return t


def test_aggregate_single_all_circle():
    t = make_tally("c", 2, {O: 100}, {O: 100})
    rep = aggregate([t], [count(parse("x1*x2", 2))])
    (row,) = rep.rows
    assert row.percent == (0.0, 100.0, 0.0, 0.0)


def test_aggregate_two_cases_by_hand():
    # x1*x2 at n=2: mul costs 8/18/38/38, overhead 6 -> N_A=64, N_G=70, dNA=38
    # x1^2 + x2 at n=2: square 5/10/15/20 plus add 2/2/2/2 -> N_A=36, N_G=47, dNA=17
    r1, r2 = count(parse("x1*x2", 2)), count(parse("x1^2 + x2", 2))
    assert (r1.n_a, r1.n_g, r1.delta_n_a) == (64, 70, 38)
    assert (r2.n_a, r2.n_g, r2.delta_n_a) == (36, 47, 17)
    t1 = make_tally("a", 2, {M: 10, P: 90}, {O: 100})
    t2 = make_tally("b", 2, {PP: 50, O: 50}, {PP: 100})
    rep = aggregate([t1, t2], [r1, r2])
    (row,) = rep.rows
    ra, rb = 100 * 64 / 70, 100 * 36 / 47
    assert row.mean_na_ng == pytest.approx((ra + rb) / 2)
    assert row.std_na_ng == pytest.approx(abs(ra - rb) / 2)
    assert row.mean_dna_ng == pytest.approx((100 * 38 / 70 + 100 * 17 / 47) / 2)
    assert row.percent == pytest.approx(((5 + 0) / 2, (50 + 25) / 2, (45 + 0) / 2, (0 + 75) / 2))
    assert [t.case for _, t, _ in rep.ranking] == ["b", "a"]
    assert rep.overall.examples == 2


def test_aggregate_groups_by_dimension():
    tallies = [make_tally(f"c{i}", n, {O: 1}, {O: 1}) for i, n in enumerate((2, 3, 2))]
    reports = [count(parse("x1*x2", 2)), count(parse("x1*x2*x3", 3)), count(parse("x1*x2", 2))]
    rep = aggregate(tallies, reports)
    assert [r.n for r in rep.rows] == [2, 3]
    assert [r.examples for r in rep.rows] == [2, 1]


def test_empty_aggregate_csv_is_header_only():
    assert aggregate_csv(aggregate([], [])) == ",".join(AGGREGATE_HEADER) + "\n"


def test_csv_output_is_deterministic():
    cases = parse_corpus(
        "a; 2; -1,1, -1,1; exp(x1*x2)\n"
        "b; 2; 0.5,2, 0.5,2; x1/x2 + x2^3\n"
    )
    outs = []
    for _ in range(2):
        res = run_corpus(cases, trials=8, seed=1)
        rep = aggregate([r.tally for r in res], [r.cost for r in res])
        outs.append((aggregate_csv(rep), ranking_csv(rep), trials_csv(x for r in res for x in r.records)))
    assert outs[0] == outs[1]
    assert outs[0][0].splitlines()[0] == ",".join(AGGREGATE_HEADER)


# --- corpus parsing ----------------------------------------------------------------


def test_parse_corpus_text_and_json_agree():
    text = "# comment\nsq; 2; -1,1, 0,2; x1^2 + x2\n"
    js = json.dumps([{"name": "sq", "n": 2, "domain": [[-1, 1], [0, 2]], "expression": "x1^2 + x2"}])
    (a,), (b,) = parse_corpus(text), parse_corpus(js)
    assert (a.name, a.n, a.expression) == (b.name, b.n, b.expression)
    assert a.domain.lower.tolist() == b.domain.lower.tolist() == [-1, 0]


@pytest.mark.parametrize(
    "text",
    [
        "a; 2; -1,1; x1",
        "a; two; -1,1, -1,1; x1",
        "a; 1; 1,-1; x1",
        "a; 1; -1,1",
        "a; 1; -1,1; x1\na; 1; -1,1; x1",
        '{"name": "a"}',
    ],
)
def test_parse_corpus_errors(text):
    with pytest.raises(CorpusError):
        parse_corpus(text)


def test_parse_boxes():
    boxes = parse_boxes("a; 0,1, 0,1\na; 0.2,0.3, 0.4,0.5\nb; 1,2\n")
    assert [len(v) for v in boxes.values()] == [2, 1]
    assert boxes["a"][1].upper.tolist() == [0.3, 0.5]
    with pytest.raises(CorpusError):
        parse_boxes("a 0,1")


def test_tally_percent_and_labels():
    t = make_tally("x", 1, {M: 1, O: 1}, {P: 1, PP: 1})
    assert [t.percent(lab) for lab in LABELS] == [25.0, 25.0, 25.0, 25.0]
    assert math.fsum(t.percent(lab) for lab in LABELS) == 100.0
