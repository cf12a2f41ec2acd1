import json
from fractions import Fraction as F

import pytest
from conftest import LINE4_SKETCH_2, line4, triangle_eq2
from hypothesis import given, settings
from hypothesis import strategies as st

from bertnet import io as fio
from bertnet.cli import main
from bertnet.closed_form import solve_line3, solve_star, solve_two_sellers
from bertnet.errors import MalformedInput
from bertnet.network import Network
from bertnet.strategy import PiecewiseCdf, Segment, StrategyProfile


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


# -- file formats -------------------------------------------------------------


def test_network_round_trip():
    net = Network.from_edges([F(3, 2), 0, 7], [(0, 1, F(1, 3)), (1, 2, 5)], labels=["a", "b", "c"])
    again = fio.network_from_json(json.loads(fio.dumps(fio.network_to_json(net))))
    assert again.alpha == net.alpha and again.beta == net.beta and again.labels == net.labels


def test_network_merges_captive_markets():
    doc = {"formatVersion": 1, "sellers": [{"id": "x", "alpha": ["1/2", "1/3"]}, {"id": "y", "alpha": 0}],
           "markets": [{"a": "x", "b": "y", "beta": 1}]}
    assert fio.network_from_json(doc).alpha[0] == F(5, 6)


def test_network_rejects_bad_documents():
    with pytest.raises(MalformedInput):
        fio.network_from_json({"formatVersion": 2, "sellers": []})
    with pytest.raises(MalformedInput):
        fio.network_from_json({"formatVersion": 1, "sellers": [{"id": "a", "alpha": 1}],
                               "markets": [{"a": "a", "b": "z", "beta": 1}]})


def test_sketch_round_trip():
    net, sk, _ = triangle_eq2()
    assert fio.sketch_from_json(net, fio.sketch_to_json(net, sk)) == sk


def test_free_sketch_round_trip():
    net = line4()
    doc = fio.free_sketch_to_json(net, LINE4_SKETCH_2)
    assert fio.is_free_sketch(doc)
    assert fio.free_sketch_from_json(net, doc) == LINE4_SKETCH_2


@pytest.mark.parametrize(
    "net, prof",
    [
        (Network.line([1, 0], [1]), solve_two_sellers(1, 0, 1)),
        (Network.line([0, 0], [2]), solve_two_sellers(0, 0, 2)),
        (Network.line([1, 0, 0], [1, 1]), solve_line3(1, 1, 1).profile),
        (solve_star(1, [5, F(1, 2)]).network, solve_star(1, [5, F(1, 2)]).profile),
    ],
)
def test_profile_round_trip_is_exact(net, prof):
    doc = json.loads(fio.dumps(fio.profile_to_json(net, prof)))
    assert fio.profile_from_json(net, doc) == prof


@settings(max_examples=40, deadline=None)
@given(
    st.fractions(F(1, 20), F(19, 20), max_denominator=40),
    st.fractions(F(0), F(1), max_denominator=40),
)
def test_profile_round_trip_property(lo, atom):
    # Fbar falls from 1 at lo to the atom at 1
    seg = Segment.through(lo, F(1), F(1), atom)
    prof = StrategyProfile((PiecewiseCdf((seg,), atom), PiecewiseCdf.point_at_one()))
    net = Network.line([1, 1], [1])
    doc = json.loads(fio.dumps(fio.profile_to_json(net, prof, utilities=[F(1), F(1)])))
    assert fio.profile_from_json(net, doc) == prof


def test_profile_csv_columns():
    net = Network.line([1, 0], [1])
    lines = fio.profile_csv(net, solve_two_sellers(1, 0, 1), points=8).splitlines()
    assert lines[0] == "seller,x,F" and len(lines) == 1 + 2 * 8


# -- command line -------------------------------------------------------------


@pytest.fixture
def files(tmp_path):
    def net_file(net, name="net.json"):
        return str(write_json(tmp_path / name, fio.network_to_json(net)))

    def prof_file(net, prof, name="profile.json"):
        return str(write_json(tmp_path / name, fio.profile_to_json(net, prof)))

    return tmp_path, net_file, prof_file


def test_cli_solve_tree_golden(files, capsys):
    _, net_file, _ = files
    code = main(["solve", "tree", net_file(Network.line([1, 0, 0], [1, 1]))])
    out = capsys.readouterr().out
    assert code == 0
    assert out.splitlines()[0] == "u = (1, 2/3, 1/3)"
    assert "T = (1, 2/3, 1/3)" in out and out.rstrip().endswith("verdict: Equilibrium")


def test_cli_solve_writes_outputs(files, capsys):
    tmp, net_file, _ = files
    assert main(["solve", "two", net_file(Network.line([1, 0], [1])), "--out", str(tmp / "o"), "--points", "4"]) == 0
    assert {p.name for p in (tmp / "o").iterdir()} == {"profile.json", "profile.csv"}
    doc = json.loads((tmp / "o" / "profile.json").read_text())
    assert doc["formatVersion"] == 1


def test_cli_solve_star_and_clique(files, capsys):
    _, net_file, _ = files
    star = solve_star(10, [2, 1]).network
    assert main(["solve", "star", net_file(star)]) == 0
    assert "u = (10, 85/33, 5/3)" in capsys.readouterr().out
    assert main(["solve", "clique", net_file(Network.clique([4, 3, 2]), "k.json")]) == 1
    assert "verdict: NotEquilibrium" in capsys.readouterr().out


def test_cli_sketch_solve(files, capsys):
    tmp, net_file, _ = files
    net, sk, _ = triangle_eq2()
    sketch = write_json(tmp / "sketch.json", fio.sketch_to_json(net, sk))
    assert main(["sketch-solve", net_file(net), str(sketch)]) == 0
    assert capsys.readouterr().out.startswith("u = (8/3, 10/3, 4)")


def test_cli_search_boundaries(files, capsys):
    tmp, net_file, _ = files
    shape = write_json(tmp / "shape.json", fio.free_sketch_to_json(line4(), LINE4_SKETCH_2))
    assert main(["search-boundaries", net_file(line4()), str(shape)]) == 0
    assert capsys.readouterr().out.startswith("T = (1, 6/7, 7/9)")


def test_cli_verify_equilibrium(files, capsys):
    _, net_file, prof_file = files
    net = Network.line([1, 0], [1])
    assert main(["verify", net_file(net), prof_file(net, solve_two_sellers(1, 0, 1)), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "Equilibrium"


def test_cli_verify_perturbed_names_deviation(files, capsys):
    _, net_file, prof_file = files
    net = Network.line([1, 0], [1])
    cap = PiecewiseCdf((Segment(F(1, 2), F(1), F(1, 5), F(2, 5)),), F(3, 5))
    prof = StrategyProfile((cap, solve_two_sellers(1, 0, 1)[1]))
    assert main(["verify", net_file(net), prof_file(net, prof)]) == 1
    assert "worst deviation: seller 1 at price 1 gains" in capsys.readouterr().out


def test_cli_fp_is_deterministic(files, capsys):
    tmp, net_file, _ = files
    net = net_file(Network.line([1, 0], [1]))
    args = ["fp", net, "--grid", "20", "--iters", "400", "--seed", "7"]
    assert main(args + ["--out", str(tmp / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp / "b.csv")]) == 0
    a, b = (tmp / "a.csv").read_bytes(), (tmp / "b.csv").read_bytes()
    assert a == b and a.startswith(b"seller,gridPrice,mass\n")


def test_cli_bounds(files, capsys):
    _, net_file, prof_file = files
    net = Network.line([1, 0, 0], [1, 1])
    assert main(["bounds", net_file(net), prof_file(net, solve_line3(1, 1, 1).profile), "--cut", "1,2"]) == 0
    out = capsys.readouterr().out
    assert "seller 0: path [1/4, 4]" in out and "bound 2" in out
    big = Network.line([1, 0, 0, 0], [1, 10, 1])
    assert main(["bounds", net_file(big, "big.json"), "--big-edges", "1-2", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["bigCut"] == {"3": "242/125"}


def test_cli_export_cdf(files, capsys):
    _, net_file, prof_file = files
    net = Network.line([1, 0], [1])
    assert main(["export-cdf", net_file(net), prof_file(net, solve_two_sellers(1, 0, 1)), "--points", "5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "seller,x,F"


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        ["solve", "star", "{net}"],
        ["solve", "two", "{missing}"],
        ["verify", "{net}", "{missing}"],
    ],
)
def test_cli_usage_errors_exit_2(files, argv, capsys):
    tmp, net_file, _ = files
    subst = {"{net}": net_file(Network.line([1, 0, 0, 0], [1, 1, 1])), "{missing}": str(tmp / "nope.json")}
    argv = [subst.get(a, a) for a in argv]
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 2
