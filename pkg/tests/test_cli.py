import io

import pytest

from posmod.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    assert call("corpus", "cycles", "Tn", "--n", 4, "--cap", 6, "--out", d)[0] == 0
    assert call("corpus", "cycles", "Tprime", "--out", d)[0] == 0
    assert call("corpus", "cycles", "T", "--out", d)[0] == 0
    assert call("corpus", "group", "--p", 2, "--k", 2, "--g", 2, "--out", d)[0] == 0
    return d


def test_corpus_files(corpus_dir):
    names = sorted(p.name for p in corpus_dir.iterdir())
    for n in ["T4.pmt", "Tprime.pmt", "T.pmt", "Tag+.pmt", "C3.pms", "C3+C5.pms", "two-points.pms", "Z4-2.pms"]:
        assert n in names


def test_corpus_stdout():
    code, out, _ = call("corpus", "successor")
    assert code == 0 and "(theory Succ" in out and "corpus: COMPUTED" in out


def test_check_pc(corpus_dir):
    code, out, _ = call("check-pc", corpus_dir / "C3.pms", "-T", corpus_dir / "T4.pmt", "--max-size", 6)
    assert code == 0
    assert out.splitlines()[0] == "check-pc: HOLDS_WITHIN(6)"
    assert "caveat" in out
    code, out, _ = call("check-pc", corpus_dir / "chain2.pms", "-T", corpus_dir / "T4.pmt", "--max-size", 6,
                        "--continuation")
    assert code == 1
    assert "(exists (y2) (S x1 y2))" in out and "CONTINUATION" in out


def test_check_robinson(corpus_dir):
    code, out, _ = call("check-robinson", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--tuple-cap", 3)
    assert code == 0 and "HOLDS_WITHIN(6)" in out


def test_homs(corpus_dir):
    code, out, _ = call("homs", corpus_dir / "C3.pms", corpus_dir / "C5.pms", "--count")
    assert (code, out) == (0, "0\n")
    code, out, _ = call("homs", corpus_dir / "C3.pms", corpus_dir / "C3.pms")
    assert code == 0 and out.count("(map") == 3
    code, out, _ = call("homs", corpus_dir / "chain2.pms", corpus_dir / "C3.pms", "--kind", "immersion")
    assert code == 0 and "(map" not in out


def test_machine_format(corpus_dir):
    code, out, _ = call("check-pc", corpus_dir / "C3.pms", "-T", corpus_dir / "T4.pmt", "--max-size", 6,
                        "--format", "machine")
    assert code == 0 and out == "check-pc\tHOLDS_WITHIN\t6\t-\n"


def test_check_immersion_modes(corpus_dir):
    for mode in ("retraction", "oracle"):
        code, out, _ = call("check-immersion", corpus_dir / "chain2.pms", corpus_dir / "C3.pms",
                            "--map", "0,1", "--mode", mode)
        assert code == 1 and "FAILS" in out


def test_check_hmax_two_points(corpus_dir):
    code, out, _ = call("check-hmax", corpus_dir / "two-points.pms", "-T", corpus_dir / "Tprime.pmt",
                        "--max-size", 4)
    assert code == 1 and "identified" in out


def test_qe_and_ctr(corpus_dir):
    code, out, _ = call("qe", "-T", corpus_dir / "T4.pmt", "--max-size", 6,
                        "--formula", "(exists (z) (and (S x z) (S z y)))")
    assert code == 0 and "(S y x)" in out
    code, out, _ = call("ctr", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--formula", "(= x y)",
                        "--fragment", "2,0,2,or", "--complement")
    assert code == 0 and "COMPLEMENT\n  (or (S x y) (S y x))" in out


def test_companion(corpus_dir):
    code, out, _ = call("companion", corpus_dir / "T.pmt", corpus_dir / "Tprime.pmt", "--max-size", 4)
    assert code == 1 and "FAILS" in out


def test_amalgam(corpus_dir):
    code, out, _ = call("amalgam", corpus_dir / "C3.pms", corpus_dir / "C3.pms", corpus_dir / "C3.pms",
                        "--imap", "1,2,0", "--fmap", "0,1,2", "-T", corpus_dir / "T4.pmt", "--max-size", 5)
    assert code == 0 and out.startswith("amalgam: FOUND")


def test_complete_and_members(corpus_dir):
    code, out, _ = call("check-complete", "-T", corpus_dir / "Tag+.pmt", "--max-size", 5)
    assert code == 1
    code, out, _ = call("pc-members", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--hmax")
    assert code == 0


def test_determinism(corpus_dir):
    argv = ["check-robinson", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--scope", "local"]
    assert call(*argv) == call(*argv)
    argv = ["models", "-T", corpus_dir / "T4.pmt", "--max-size", 5, "--list"]
    assert call(*argv) == call(*argv)


def test_universe_cache(corpus_dir, tmp_path):
    argv = ["pc-members", "-T", corpus_dir / "T4.pmt", "--max-size", 5, "--universe", tmp_path / "u"]
    first = call(*argv)
    assert (tmp_path / "u" / "manifest.json").exists()
    assert call(*argv) == first
    code, _, err = call("pc-members", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--universe", tmp_path / "u")
    assert code == 2 and "bound" in err


def test_errors(corpus_dir):
    code, _, err = call("check-pc", corpus_dir / "missing.pms", "-T", corpus_dir / "T4.pmt", "--max-size", 3)
    assert code == 2 and "cannot read" in err
    code, _, err = call("check-pc", corpus_dir / "C4.pms", "-T", corpus_dir / "T4.pmt", "--max-size", 4)
    assert code == 2 and "no-4-cycle" in err
    code, _, _ = call("no-such-verb")
    assert code == 2
    code, out, _ = call("models", "-T", corpus_dir / "T4.pmt", "--max-size", 6, "--budget", 50)
    assert code == 3 and "BUDGET_EXCEEDED" in out


def test_timing_goes_to_stderr(corpus_dir):
    code, out, err = call("models", "-T", corpus_dir / "T4.pmt", "--max-size", 3, "--timing")
    assert code == 0 and "s\n" in err and "s\n" not in out.split("models")[-1][-3:]
