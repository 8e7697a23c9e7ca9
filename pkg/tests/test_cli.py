import json
import subprocess
import sys

import numpy as np
import pytest

from xstates import jsonio
from xstates.bloch import BlochState, from_bloch
from xstates.cli import main
from xstates.errors import MalformedState
from xstates.geometry import SectionPoint2
from xstates.group import WeylElement, random_rotation


def run(args, stdin=None):
    proc = subprocess.run(
        [sys.executable, "-m", "xstates.cli", *args], input=stdin, capture_output=True, text=True
    )
    return proc.returncode, proc.stdout, proc.stderr


BELL = json.dumps({"n": 2, "components": {"XX": [1, 0], "YY": [-1, 0], "ZZ": [1, 0]}})


class TestJson:
    def test_complex_round_trip_is_exact(self):
        z = complex(0.1 + 0.2, -1 / 3)
        assert jsonio.decode_complex(json.loads(json.dumps(jsonio.encode_complex(z)))) == z

    def test_negative_zero_normalised(self):
        assert jsonio.dumps([-0.0]) == jsonio.dumps([0.0])

    def test_state_round_trip(self):
        rng = np.random.default_rng(0)
        b = BlochState.from_vector(2, rng.normal(size=15) + 1j * rng.normal(size=15))
        assert jsonio.decode_state(json.loads(jsonio.dumps(jsonio.encode_bloch(b)))) == b
        d = from_bloch(b)
        back = jsonio.decode_state(json.loads(jsonio.dumps(jsonio.encode_density(d))))
        assert np.array_equal(back.matrix, d.matrix)

    def test_section_round_trip(self):
        s = SectionPoint2(1j, 2, (3, 4 - 1j, 5))
        assert jsonio.decode_section(json.loads(jsonio.dumps(jsonio.encode_section(s)))) == s

    def test_group_encodings(self):
        g = random_rotation(2, 1)
        assert np.asarray(jsonio.encode_rotation(g)["blocks"]).shape == (2, 3, 3, 2)
        assert np.asarray(jsonio.encode_weyl(WeylElement([np.eye(2)]))["planar"]).shape == (1, 2, 2, 2)

    @pytest.mark.parametrize(
        "obj",
        [[], {"n": 2}, {"n": 0, "components": {}}, {"n": 2, "components": {"XQ": [1, 0]}},
         {"n": 1, "components": {"X": [1]}}, {"n": 1, "matrix": [[1, 0]]}, {"n": 1, "components": {"X": "a"}}],
    )
    def test_malformed(self, obj):
        with pytest.raises(MalformedState):
            jsonio.decode_state(obj)


class TestCommands:
    def test_invariants_bell(self, tmp_path):
        path = tmp_path / "bell.json"
        path.write_text(BELL)
        code, out, _ = run(["invariants", "--input", str(path)])
        assert code == 0
        p = [complex(*z) for z in json.loads(out)["p"]]
        assert np.allclose(p, [0, 0, 0, 3, -1])

    def test_gen_reduce_pipeline(self):
        for seed in range(5):
            _, state, _ = run(["gen", "--x-state", "--seed", str(seed)])
            code, out, _ = run(["reduce"], stdin=state)
            assert code == 0
            assert set(json.loads(out)) == {"g", "section"}

    def test_reduce_non_x(self):
        _, state, _ = run(["gen", "--seed", "4"])
        code, out, _ = run(["reduce"], stdin=state)
        assert code == 1
        assert json.loads(out)["error"] == "reduction-failed"

    def test_bloch_conversion_round_trip(self):
        _, state, _ = run(["gen", "--n", "3", "--seed", "2"])
        _, dens, _ = run(["bloch"], stdin=state)
        _, back, _ = run(["bloch"], stdin=dens)
        a = jsonio.decode_state(json.loads(state))
        b = jsonio.decode_state(json.loads(back))
        assert a.allclose(b, atol=1e-12)

    def test_quotient_coords(self):
        _, state, _ = run(["gen", "--fiber", "--n", "4", "--seed", "1"])
        code, out, _ = run(["quotient-coords"], stdin=state)
        q = json.loads(out)["quotient"]
        assert code == 0 and len(q["t_tilde"]) == 3 and len(q["s_tilde"]) == 2

    def test_quotient_coords_rejects_non_fiber(self):
        _, state, _ = run(["gen", "--n", "3", "--seed", "1"])
        code, out, _ = run(["quotient-coords"], stdin=state)
        assert code == 1 and json.loads(out)["error"] == "not-in-fiber"

    def test_gen_is_deterministic(self):
        outs = {run(["gen", "--x-state", "--n", "3", "--seed", "8"])[1] for _ in range(2)}
        assert len(outs) == 1

    def test_output_file(self, tmp_path):
        path = tmp_path / "out.json"
        assert main(["gen", "--seed", "1", "--output", str(path)]) == 0
        assert json.loads(path.read_text())["n"] == 2

    def test_verify_dims(self):
        code, out, _ = run(["verify", "dims", "--n", "2", "--seed", "1", "--trials", "3", "--json"])
        report = json.loads(out)["reports"][0]
        assert code == 0 and report["pass"]
        assert set(report["observed"]["param_ranks"]) == {11}
        assert set(report["observed"]["orbit_ranks"]) == {6}

    def test_verify_text(self):
        code, out, _ = run(["verify", "torsor", "--trials", "5"])
        assert code == 0 and out.startswith("PASS torsor")

    def test_verify_failure_exit(self):
        code, _, _ = run(["verify", "invariance", "--n", "2", "--trials", "2", "--tol", "1e-300"])
        assert code == 1


class TestErrors:
    def test_unreadable(self, tmp_path):
        code, _, err = run(["invariants", "--input", str(tmp_path / "missing.json")])
        assert code == 2 and "cannot read" in err

    def test_malformed_json(self):
        code, _, err = run(["invariants"], stdin="{not json")
        assert code == 2 and "malformed JSON" in err

    def test_malformed_state(self):
        code, _, _ = run(["invariants"], stdin=json.dumps({"n": 2, "components": {"Q": [1, 0]}}))
        assert code == 2

    def test_bad_trace(self):
        code, _, _ = run(["invariants"], stdin=json.dumps({"n": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}))
        assert code == 2

    @pytest.mark.parametrize(
        "args",
        [["verify", "nope"], ["frobnicate"], ["verify", "dims", "--n", "7"], ["verify", "all", "--trials", "0"]],
    )
    def test_usage(self, args):
        assert main(args) == 2

    def test_wrong_size_for_invariants(self):
        _, state, _ = run(["gen", "--n", "3", "--seed", "1"])
        code, _, _ = run(["invariants"], stdin=state)
        assert code == 2
