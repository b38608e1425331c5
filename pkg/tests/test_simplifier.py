import pytest

from eqsimp.axioms import USED01
from eqsimp.collection import GcMode
from eqsimp.oracle import equivalent
from eqsimp.simplifier import Config, PRESETS, Simplifier, UnknownPreset, preset, select_gc, simplify
from eqsimp.term import parse, polish_size, random_expr, to_string

# valuation type, strict application, maxSubCount, BU, extended axioms, 1F
VARIANTS = {
    "default": (0, False, 6, False, False, False),
    "var1": (0, True, 6, False, False, False),
    "var2": (0, False, 1, False, False, False),
    "var3": (0, False, 6, True, False, False),
    "var4": (0, False, 6, False, True, False),
    "var5": (0, False, 6, False, False, True),
    "var6": (0, True, 1, False, False, False),
    "var7": (1, False, 6, False, False, False),
    "var8": (1, False, 1, False, True, False),
    "var9": (2, False, 6, False, False, False),
    "var10": (2, True, 1, False, False, False),
    "var11": (3, False, 6, False, False, False),
    "var12": (3, False, 1, False, False, True),
}


def test_presets_match_the_variant_table():
    assert set(PRESETS) == set(VARIANTS)
    for name, row in VARIANTS.items():
        cfg = PRESETS[name]
        got = (
            cfg.valuation_type, cfg.application == "strict", cfg.max_sub_count,
            cfg.bottom_up, cfg.axiom_set == "extended", cfg.one_var_first,
        )
        assert got == row, name
        assert cfg.re_count == (3 if cfg.max_sub_count == 1 else 1)


def test_preset_names_and_overrides():
    assert preset("var/6") == PRESETS["var6"]
    assert preset("default", capacity=10).capacity == 10
    with pytest.raises(UnknownPreset):
        preset("var13")


@pytest.mark.parametrize(
    "kwargs", [{"valuation_type": 4}, {"application": "x"}, {"max_sub_count": 0}, {"dedupe": "x"}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        Config(**kwargs)


def test_select_gc():
    assert select_gc(0, False) is GcMode.ALL_MINIMAL
    assert select_gc(1, False) is GcMode.ONE_MINIMAL
    # once tightened the collector stays tight
    assert select_gc(0, False, GcMode.ONE_MINIMAL) is GcMode.ONE_MINIMAL
    assert select_gc(0, True) is GcMode.REACHABLE
    assert select_gc(3, True) is GcMode.REACHABLE


@pytest.mark.parametrize(
    "text, expected",
    [
        ("a + b + !b + a", "1"),
        ("a + ab", "a"),
        ("a + b + !b + c", "1"),
        ("a.0", "0"),
        ("!!a", "a"),
        ("1 + (a + b)c", "1"),
    ],
)
def test_worked_examples(text, expected):
    result = simplify(parse(text))
    assert to_string(result.simplified) == expected
    assert result.final_size == polish_size(result.simplified)


def test_already_minimal_input():
    result = simplify(parse("a"))
    assert to_string(result.simplified) == "a"
    assert result.iterations == []
    assert result.termination == "expected_size"


def test_one_var_first_on_example():
    result = simplify(parse("a + b + !b + c"), preset("var5"))
    assert to_string(result.simplified) == "1"


def test_max_count_termination():
    result = simplify(parse("ab + c"), Config(max_count=2))
    assert result.termination == "max_count"
    assert result.final_size == 5


def corpus(n, letters, size):
    return [random_expr(seed, letters, size) for seed in range(n)]


def test_size_column_is_monotone():
    for expr in corpus(15, 3, 60):
        result = simplify(expr, Config(iteration_timeout=None))
        sizes = [result.input_size] + [s.size for s in result.iterations]
        assert all(x >= y for x, y in zip(sizes, sizes[1:]))
        assert result.final_size <= result.input_size


@pytest.mark.parametrize("name", ["default", "var1", "var3", "var5", "var7", "var11"])
def test_determinism_without_timeout(name):
    heavy = name in ("var3", "var11")
    cfg = preset(name, iteration_timeout=None, max_count=4, capacity=5_000 if heavy else 500_000)
    # every column but time_ms must repeat
    strip = lambda r: [row.split(",")[:1] + row.split(",")[2:] for row in r.stats_csv().splitlines()]
    for expr in corpus(4, 3, 14 if heavy else 40):
        r1, r2 = simplify(expr, cfg), simplify(expr, cfg)
        assert r1.simplified == r2.simplified
        assert strip(r1) == strip(r2)


def test_size_drops_are_accounted_for():
    for expr in corpus(15, 3, 80):
        sim = Simplifier(Config(iteration_timeout=None))
        drops = []
        sim.trace = lambda axiom, val, flags, drop, sides: drops.append((flags, drop))
        result = sim.run(expr)
        for st in result.iterations:
            assert st.start_size - st.size == st.ds01 + st.ods
        assert sum(d for f, d in drops if f & USED01 and d > 0) == sum(s.ds01 for s in result.iterations)
        assert sum(d for f, d in drops if not f & USED01 and d > 0) == sum(s.ods for s in result.iterations)
        assert len(drops) == sum(s.napl for s in result.iterations)


def test_example1_stats_without_guards():
    # the narrated run, before the size guards are introduced
    sim = Simplifier(Config(size_guard=False))
    events = []
    sim.trace = lambda axiom, val, flags, drop, sides: events.append((val, flags, drop, sides))
    result = sim.run(parse("a + b + !b + a"))
    assert to_string(result.simplified) == "1"
    assert len(result.iterations) == 1
    merge = [e for e in events if set(e[3]) == {7, 2}]
    assert len(merge) == 1
    val, flags, drop, _ = merge[0]
    assert val == (3, 4, 6) and flags & USED01 and drop == 7
    assert result.iterations[0].ds01 == 7


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_soundness_per_preset(name):
    # bottom-up and type-3 runs grow the store quickly: keep them small
    heavy = name in ("var3", "var11", "var12")
    cfg = preset(name, max_count=3, iteration_timeout=2.0, capacity=5_000 if heavy else 50_000)
    for expr in corpus(6, 3, 14 if heavy else 30):
        result = simplify(expr, cfg)
        assert equivalent(expr, result.simplified)
        assert result.final_size <= result.input_size


def test_stats_csv_layout():
    result = simplify(parse("a + ab"))
    lines = result.stats_csv().splitlines()
    assert lines[0] == "iter,time_ms,size,nval,napl,ds01,nd01,ods,nods,nid,nid1,Mi,Ni,Mf,Nf"
    assert len(lines) == 1 + len(result.iterations)
    assert lines[-1].split(",")[2] == "1"


def test_capacity_is_respected():
    expr = random_expr(3, 3, 200)
    sim = Simplifier(Config(capacity=2_000, iteration_timeout=None, max_count=3))
    result = sim.run(expr)
    assert len(sim.store) <= 2_000
    assert equivalent(expr, result.simplified)
