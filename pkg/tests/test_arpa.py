"""ARPA serialization: canonical round trips and malformed inputs."""

import pytest

from ngramlm import interpolate_static, read_arpa, write_arpa
from ngramlm.errors import CountMismatch, MissingSection, ParseError
from ngramlm.model import WeightVector
from ngramlm.prune import prune_entropy
from conftest import make_model


def canonical_bytes(model, tmp_path, name):
    path = str(tmp_path / name)
    write_arpa(model, path)
    return path, open(path, "rb").read()


def five_models():
    m1 = make_model(51, 30, 1)[0]
    m2 = make_model(52, 40, 2)[0]
    m3 = make_model(53, 60, 3)[0]
    m4 = prune_entropy(m3, 1e-4)
    m5 = interpolate_static(
        [make_model(54, 40, 2, vocab_words=list("abcdef"))[0],
         make_model(55, 40, 2, vocab_words=list("abcdef"))[0]],
        WeightVector(values=(0.4, 0.6), labels=("x", "y")),
    )
    return [m1, m2, m3, m4, m5]


def test_round_trip_bit_identical(tmp_path):
    for i, model in enumerate(five_models()):
        path, blob = canonical_bytes(model, tmp_path, f"m{i}.arpa")
        again = read_arpa(path)
        path2 = str(tmp_path / f"m{i}.rt.arpa")
        write_arpa(again, path2)
        assert open(path2, "rb").read() == blob, f"model {i} not stable"


def test_read_back_preserves_queries(tmp_path, medium_model):
    path = str(tmp_path / "m.arpa")
    write_arpa(medium_model, path)
    again = read_arpa(path)
    # 7 significant digits in the file
    for g, lp in again.probs.items():
        assert abs(lp - medium_model.probs[g]) < 5e-7 * max(1.0, abs(lp))
    assert again.per_order_counts() == medium_model.per_order_counts()


def test_count_mismatch(tmp_path):
    text = (
        "\\data\\\nngram 1=4\nngram 2=5\n\n"
        "\\1-grams:\n-99\t<s>\t0\n-1\t</s>\t0\n-1\t<unk>\t0\n-1\ta\t0\n\n"
        "\\2-grams:\n-1\ta a\n\n\\end\\\n"
    )
    p = tmp_path / "bad.arpa"
    p.write_text(text)
    with pytest.raises(CountMismatch):
        read_arpa(str(p))


def test_missing_data_header(tmp_path):
    p = tmp_path / "bad.arpa"
    p.write_text("\\1-grams:\n-1\ta\n\\end\\\n")
    with pytest.raises(MissingSection):
        read_arpa(str(p))


def test_missing_end(tmp_path):
    p = tmp_path / "bad.arpa"
    p.write_text(
        "\\data\\\nngram 1=3\n\n\\1-grams:\n-99\t<s>\n-1\t</s>\n-1\t<unk>\n"
    )
    with pytest.raises(MissingSection):
        read_arpa(str(p))


def test_parse_error_carries_line_number(tmp_path):
    p = tmp_path / "bad.arpa"
    p.write_text(
        "\\data\\\nngram 1=3\n\n\\1-grams:\n-99\t<s>\nnot-a-number\t</s>\n-1\t<unk>\n\n\\end\\\n"
    )
    with pytest.raises(ParseError) as exc_info:
        read_arpa(str(p))
    assert exc_info.value.line_no == 6


def test_reserved_symbols_required(tmp_path):
    p = tmp_path / "bad.arpa"
    p.write_text("\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\n\n\\end\\\n")
    with pytest.raises(ParseError):
        read_arpa(str(p))


def test_backoff_at_highest_order_rejected(tmp_path):
    p = tmp_path / "bad.arpa"
    p.write_text(
        "\\data\\\nngram 1=3\n\n\\1-grams:\n-99\t<s>\t0\n-1\t</s>\t0\n-1\t<unk>\t0\n\n\\end\\\n"
    )
    with pytest.raises(ParseError):
        read_arpa(str(p))
