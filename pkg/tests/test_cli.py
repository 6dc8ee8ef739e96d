import subprocess
import sys

import pytest

from fpsaut import cli
from fpsaut.autgroup import CommutatorCertificate
from fpsaut.parsing import parse_automorphism
from fpsaut.ring import PrimeField
from fpsaut.series import SeriesContext


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_decompose_rationals(capsys):
    code, out, err = run(["decompose", "--ring", "q", "-n", "1", "-D", "8", "X1 -> X1 + X1^2"], capsys)
    assert code == 0
    cert = CommutatorCertificate.from_text(out)
    assert len(cert) == 1
    assert err.splitlines()[0] == "OK: 1 pair(s), verified"


def test_decompose_prime_field(capsys):
    code, out, _ = run(["decompose", "--ring", "fp:5", "-n", "1", "-D", "25", "X1 -> X1 + X1^3"], capsys)
    assert code == 0
    assert len(CommutatorCertificate.from_text(out)) <= 2


@pytest.mark.parametrize("argv,token", [
    (["decompose", "--ring", "fp:3", "-n", "1", "-D", "5", "X1 -> X1 + X1^2"], "UnsupportedCharacteristic"),
    (["decompose", "--ring", "q", "-n", "1", "-D", "5", "X1 -> 2*X1"], "NotInGI"),
    (["decompose", "--ring", "q", "-n", "1", "-D", "5", "X1 -> X1 +"], "ParseError"),
    (["decompose", "--ring", "fp:5", "-n", "1", "-D", "8", "--algorithm", "char0", "X1 -> X1 + X1^2"],
     "BadUnits"),
    (["decompose", "--ring", "z", "-n", "1", "-D", "5", "X1 -> X1"], "ParseError"),
    (["decompose", "-n", "1", "X1 -> X1"], "UsageError"),
    (["frobnicate"], "UsageError"),
    (["invert", "--ring", "dual:5", "-n", "1", "-D", "3", "X1 -> eps*X1"], "NotAutomorphism"),
])
def test_failures_lead_with_token(argv, token, capsys):
    code, out, err = run(argv, capsys)
    assert code != 0
    assert out == ""
    assert err.splitlines()[0].startswith(token + ":")


def test_bad_units_reports_degree(capsys):
    argv = ["decompose", "--ring", "fp:5", "-n", "1", "-D", "8", "--algorithm", "char0", "X1 -> X1 + X1^2"]
    _, _, err = run(argv, capsys)
    assert "degree 5" in err.splitlines()[0]


def _decompose_to(tmp_path, capsys, ring, n, D, text):
    target = tmp_path / "alpha.txt"
    target.write_text(text + "\n")
    cert = tmp_path / "cert.txt"
    code, _, _ = run(["decompose", "--ring", ring, "-n", str(n), "-D", str(D), str(target),
                      "-o", str(cert)], capsys)
    assert code == 0
    return target, cert


def test_verify_round_trip_and_mutation(tmp_path, capsys):
    target, cert = _decompose_to(tmp_path, capsys, "q", 1, 6, "X1 -> X1 + X1^2")
    code, _, err = run(["verify", str(cert), str(target)], capsys)
    assert code == 0 and err.startswith("OK:")
    text = cert.read_text()
    assert "X1 -> 2*X1\n" in text
    mutated = tmp_path / "mutated.txt"
    mutated.write_text(text.replace("X1 -> 2*X1\n", "X1 -> 2*X1 + X1^3\n", 1))
    code, _, err = run(["verify", str(mutated), str(target)], capsys)
    assert code == 1
    first = err.splitlines()[0]
    assert first.startswith("VerificationFailed:")
    assert "degree 3" in first and "X1^3" in first


def test_verify_multivariate_round_trip(tmp_path, capsys):
    target, cert = _decompose_to(tmp_path, capsys, "fp:7", 2, 5, "X1 -> X1 + X2^2\nX2 -> X2 + X1^3")
    assert run(["verify", str(cert), str(target)], capsys)[0] == 0
    code, _, err = run(["verify", "-n", "3", "-D", "5", "--ring", "fp:7", str(cert), str(target)], capsys)
    assert code == 1 and err.startswith("ContextMismatch:")


def test_verify_empty_certificate_against_identity(tmp_path, capsys):
    target, cert = _decompose_to(tmp_path, capsys, "fp:5", 2, 4, "X1 -> X1\nX2 -> X2")
    assert CommutatorCertificate.from_text(cert.read_text()).pairs == ()
    assert run(["verify", str(cert), str(target)], capsys)[0] == 0


def test_verify_rejects_garbage(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a certificate\n")
    code, _, err = run(["verify", str(bad), "X1 -> X1"], capsys)
    assert code == 1 and err.startswith("ParseError:")


def test_compose_invert_commutator(capsys):
    base = ["--ring", "q", "-n", "1", "-D", "4"]
    code, out, _ = run(["compose", *base, "X1 -> X1 + X1^2", "X1 -> X1 + X1^2"], capsys)
    assert code == 0 and out == "X1 -> X1 + 2*X1^2 + 2*X1^3 + X1^4\n"
    code, out, _ = run(["invert", *base, "X1 -> X1 + X1^2"], capsys)
    assert code == 0 and out == "X1 -> X1 - X1^2 + 2*X1^3 - 5*X1^4\n"
    code, out, _ = run(["commutator", "--ring", "fp:5", "-n", "1", "-D", "3",
                        "X1 -> -X1", "X1 -> -X1 + X1^2"], capsys)
    assert code == 0 and out == "X1 -> X1 + 2*X1^2 + 4*X1^3\n"


def test_random_is_deterministic(capsys):
    argv = ["random", "--ring", "fp:5", "-n", "2", "-D", "5", "--seed", "11"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    _, other, _ = run(argv[:-1] + ["12"], capsys)
    assert other != first
    alpha = parse_automorphism(first, SeriesContext(PrimeField(5), 2, 5))
    assert alpha.in_GI()


def test_random_seed_sweep_decomposes(tmp_path, capsys):
    for seed in range(100):
        path = tmp_path / "r.txt"
        code, _, _ = run(["random", "--ring", "fp:5", "-n", "2", "-D", "5", "--seed", str(seed),
                          "-o", str(path)], capsys)
        assert code == 0
        code, out, _ = run(["decompose", "--ring", "fp:5", "-n", "2", "-D", "5", str(path)], capsys)
        assert code == 0, seed
        assert len(CommutatorCertificate.from_text(out)) <= 8


def test_output_is_byte_identical(tmp_path, capsys):
    argv = ["decompose", "--ring", "dual:5", "-n", "2", "-D", "4", "X1 -> X1 + X2^2\nX2 -> X2 + eps*X1^2"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["-o", str(a)], capsys)[0] == 0
    assert run(argv + ["-o", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fpsaut", "decompose", "--ring", "fp:7", "-n", "1",
                           "-D", "10", "X1 -> X1 + X1^2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("fpsaut-certificate 1\n")
    proc = subprocess.run([sys.executable, "-m", "fpsaut", "decompose", "--ring", "fp:3", "-n", "1",
                           "-D", "4", "X1 -> X1"], capture_output=True, text=True)
    assert proc.returncode != 0
    assert proc.stderr.splitlines()[0].startswith("UnsupportedCharacteristic:")
