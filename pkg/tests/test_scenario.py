import math

import numpy as np
import pytest

from slantmap.exprlang import eval_value
from slantmap.scenario import (BUILTINS, ScenarioError, builtin_text, load_builtin, parse_override,
                               parse_scenario)

MINIMAL = """\
[manifold M]
dim = 3

[manifold N]
dim = 3

[map]
source = M
target = N
F.1 = "x1"
F.2 = "x2"
F.3 = "0"
"""


def with_lines(*extra, base=MINIMAL):
    return base + "\n".join(extra) + "\n"


def test_minimal_defaults():
    sc = parse_scenario(MINIMAL)
    assert sc.n_points == 64 and sc.seed == 42
    assert np.array_equal(sc.box_lo, -np.ones(3)) and np.array_equal(sc.box_hi, np.ones(3))
    assert sc.side == "range-slant" and sc.v is None  # no J on the source
    pts = sc.points()
    assert len(pts) == 64 and all(np.all(np.abs(p) <= 1) for p in pts)


def test_sampling_is_seeded():
    a = parse_scenario(MINIMAL).points()
    b = parse_scenario(MINIMAL).points()
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    c = parse_scenario(with_lines("[sample]", "seed = 7")).points()
    assert not np.array_equal(a[0], c[0])


def test_builtins_parse():
    for name in BUILTINS:
        sc = load_builtin(name)
        assert sc.name == name and len(sc.digest) == 64
        assert "[map]" in builtin_text(name)
    ex31 = load_builtin("ex3_1")
    assert ex31.m == 4 and ex31.v == 0.0
    assert eval_value(ex31.declared_lambda, [0.5, 0, 0, 0]) == pytest.approx(math.exp(0.5))
    ex41 = load_builtin("ex4_1")
    assert ex41.side == "range-slant" and ex41.m == 6


def test_parameter_override_changes_map():
    sc = load_builtin("ex4_1", {"a": 0.7})
    lam = eval_value(sc.declared_lambda, np.zeros(6))
    assert lam == pytest.approx(math.pi ** 0.7 * math.sqrt(math.cosh(0.7) ** 2 + math.sinh(0.7) ** 2))


def test_expression_valued_parameter():
    sc = load_builtin("ex3_1", {"t": "x1"})
    assert eval_value(sc.declared_theta, [0.4, 0, 0, 0]) == pytest.approx(0.4)


def test_parse_override():
    assert parse_override("a=0.5") == ("a", 0.5)
    assert parse_override("t = x1") == ("t", "x1")
    with pytest.raises(ScenarioError):
        parse_override("novalue")


def test_explicit_points_and_box():
    sc = parse_scenario(with_lines("[sample]", "box = 0, 2", "box.2 = -3, -1", "point = 0.5, -2, 1"))
    assert sc.box_lo.tolist() == [0, -3, 0] and sc.box_hi.tolist() == [2, -1, 2]
    assert [p.tolist() for p in sc.points()] == [[0.5, -2.0, 1.0]]


def test_checks_section():
    sc = parse_scenario(with_lines("[checks]", "v = 0", "probe_pairs = 4", "tol.lemma3.1 = 1e-6",
                                   "allow_full_rank = true", "only = lemma, kernel.annihilation"))
    assert sc.v == 0.0 and sc.probe_pairs == 4 and sc.allow_full_rank
    assert sc.tolerances == {"lemma3.1": 1e-6}


def test_metric_and_J_entries():
    text = MINIMAL.replace("[manifold M]\ndim = 3", '[manifold M]\ndim = 4\ng.1.1 = "2"\ng.2.2 = "1"\ng.3.3 = "1"\ng.4.4 = "1"\ng.1.2 = "0.5"\nJ.2.1 = "1"\nJ.1.2 = "-1"')
    text = text.replace('F.1 = "x1"', 'F.1 = "x1 + x4"')
    sc = parse_scenario(text)
    M = sc.manifolds["M"]
    g = M.at(np.zeros(4)).g
    assert g[0, 1] == g[1, 0] == 0.5 and g[0, 0] == 2.0


@pytest.mark.parametrize("extra,line,fragment", [
    (("[map]",), 13, "appears twice"),
    (("[bogus]",), 13, "unknown section"),
    (("[sample]", "points = many"), 14, "expected an integer"),
    (("[sample]", "point = 1, 2"), 14, "dimension mismatch"),
    (("[sample]", "point = 5, 0, 0"), 14, "outside the sample box"),
    (("[sample]", "box = 1, 0"), 14, "low < high"),
    (("[checks]", "frobnicate = 1"), 14, "unknown key"),
    (("[checks]", "allow_full_rank = maybe"), 14, "true or false"),
    (("[params]", "x1 = 3"), 14, "reserved"),
])
def test_errors_carry_line_numbers(extra, line, fragment):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(with_lines(*extra))
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"line {line}")


def test_expression_error_column():
    text = MINIMAL.replace('F.2 = "x2"', 'F.2 = "x2 + * x1"')
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    # value starts at column 7; the quote is skipped and '*' is at offset 5 inside it
    assert info.value.line == 11 and info.value.column == 13


def test_unknown_identifier_in_expression():
    with pytest.raises(ScenarioError, match="line 10"):
        parse_scenario(MINIMAL.replace('F.1 = "x1"', 'F.1 = "q*x1"'))


def test_wrong_component_count():
    with pytest.raises(ScenarioError, match="dimension mismatch"):
        parse_scenario(MINIMAL.replace('F.3 = "0"\n', ""))


def test_lower_triangle_metric_rejected():
    text = MINIMAL.replace("[manifold M]\ndim = 3", '[manifold M]\ndim = 3\ng.2.1 = "0.1"')
    with pytest.raises(ScenarioError, match="lower-triangle"):
        parse_scenario(text)


def test_unquoted_expression_rejected():
    with pytest.raises(ScenarioError, match="double-quoted"):
        parse_scenario(MINIMAL.replace('F.1 = "x1"', "F.1 = x1"))


def test_invalid_utf8():
    with pytest.raises(ScenarioError, match="UTF-8"):
        parse_scenario(MINIMAL.encode() + b"\xff\n")


def test_unknown_builtin():
    with pytest.raises(ScenarioError):
        load_builtin("ex9_9")


def test_comments_and_blank_lines_ignored():
    sc = parse_scenario("# header\n\n" + MINIMAL.replace("dim = 3", "dim = 3  # three"))
    assert sc.m == 3


def test_trailing_comment_after_quoted_value():
    sc = parse_scenario(MINIMAL.replace('F.1 = "x1"', 'F.1 = "x1 + x3"   # a "quoted" note'))
    assert eval_value(sc.map.components[0], [1.0, 0.0, 2.0]) == 3.0
    with pytest.raises(ScenarioError, match="unterminated"):
        parse_scenario(MINIMAL.replace('F.1 = "x1"', 'F.1 = "x1'))
