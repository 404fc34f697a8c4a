import json

import pytest

from permweyl.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(out):
    lines = out.splitlines()
    assert lines[0].startswith("# permweyl ")
    return lines[1:]


def test_header_names_graph_and_config(capsys):
    code, out, _ = run(capsys, "check", "bowtie", "--level", "2", "--perm", "(de,cb)")
    assert code == 0
    head = out.splitlines()[0]
    assert "graph bowtie sha256:" in head and '"level": 2' in head and "check" in head
    assert "automorphism: true" in out


def test_graph_file_and_builtin_agree(capsys):
    _, a, _ = run(capsys, "check", "testdata/bowtie.graph", "--level", "2", "--perm", "(de,cb)")
    _, b, _ = run(capsys, "check", "bowtie", "--level", "2", "--perm", "(de,cb)")
    assert body(a) == body(b)
    assert a.split("sha256:")[1][:16] == b.split("sha256:")[1][:16]


def test_golden_check(capsys):
    code, out, _ = run(capsys, "check", "golden", "--level", "3", "--perm", "(111,132,321)(113,323)")
    assert code == 0  # a negative verdict is still a successful run
    assert "first: true" in out and "second: false" in out
    assert "cycle labeled 11" in out and "loop labeled 1" in out
    assert "automorphism: false" in out


def test_json_output(capsys):
    code, out, _ = run(capsys, "check", "bowtie", "--level", "2", "--perm", "(de,cb)", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["automorphism"] is True
    assert doc["header"]["graph"] == "bowtie" and len(doc["header"]["graph_sha256"]) == 16


@pytest.mark.parametrize("argv", [
    ["check", "bowtie"],
    ["check", "bowtie", "--level", "0", "--perm", "Id"],
    ["frobnicate", "bowtie"],
    ["enumerate", "bowtie", "--level", "2", "--jobs", "0"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ["check", "nosuch", "--level", "2", "--perm", "Id"],
    ["check", "bowtie", "--level", "2", "--perm", "(zz,cb)"],
    ["check", "bowtie", "--level", "2", "--perm", "(ab,cb)"],
])
def test_data_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in err


def test_bad_graph_file(capsys, tmp_path):
    p = tmp_path / "bad.graph"
    p.write_text("vertex u\nedge a u q\n")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 1 and err


def test_enumerate_counts(capsys):
    _, out, _ = run(capsys, "enumerate", "bowtie", "--level", "3", "--outer", "--count-only")
    assert body(out)[0] == "4"
    _, out, _ = run(capsys, "enumerate", "bowtie", "--level", "3", "--count-only")
    assert body(out)[0] == "32"
    _, out, _ = run(capsys, "enumerate", "o3", "--level", "2", "--outer", "--count-only")
    assert body(out)[0] == "96"


def test_enumerate_listing_is_worker_independent(capsys):
    _, one, _ = run(capsys, "enumerate", "bowtie", "--level", "3", "--jobs", "1")
    _, two, _ = run(capsys, "enumerate", "bowtie", "--level", "3", "--jobs", "2")
    assert body(one) == body(two)
    assert "\n(cab,dfe)\n" in one


def test_image(capsys):
    code, out, _ = run(capsys, "image", "bowtie", "--level", "2", "--perm", "(de,cb)", "--edge", "d")
    assert code == 0 and "S_cb S_e*" in out


def test_compose_to_identity(capsys):
    _, out, _ = run(capsys, "compose", "bowtie", "--outer", "(de,cb)", "--outer-level", "2",
                    "--inner", "(de,cb)", "--inner-level", "2")
    assert "identity: true" in out


def test_order(capsys):
    _, out, _ = run(capsys, "order", "o3", "--level", "2", "--perm", "(ca,cb)", "--left", "(a,b)")
    assert "order: 2" in out
    _, out, _ = run(capsys, "order", "o3", "--level", "2", "--perm", "(bb,cb,ca)(bc,cc)", "--inverse")
    assert "order: >100" in out


def test_equiv(capsys):
    _, out, _ = run(capsys, "equiv", "bowtie", "--level", "3", "--perm", "(dfe,cab)",
                    "--perm2", "(bde,bcb)(ede,ecb)")
    assert "equivalent: false" in out
    _, out, _ = run(capsys, "equiv", "bowtie", "--level", "3", "--perm", "Id", "--perm2", "Id")
    assert "equivalent: true" in out


def test_small_verbs(capsys):
    assert run(capsys, "validate", "o3")[0] == 0
    _, out, _ = run(capsys, "paths", "bowtie", "--level", "3")
    assert "24" in out
    _, out, _ = run(capsys, "count-perms", "bowtie", "--level", "3")
    assert "373248" in out.replace(",", "")
    _, out, _ = run(capsys, "permgraph", "bowtie", "--level", "2", "--perm", "(de,cb)", "--dot")
    assert "digraph" in out


def test_table_bowtie_stable(capsys):
    _, a, _ = run(capsys, "table", "--bowtie", "--max-level", "3")
    _, b, _ = run(capsys, "table", "--bowtie", "--max-level", "3", "--jobs", "2")
    assert body(a) == body(b)
    assert "373,248" in a and " 32 " in a
