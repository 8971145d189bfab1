import pytest

from data_encodings import (ADD, AND, BOOL, FALSE, LENGTH, MULT, NOT, OR, SNOC, TRUE, XOR, binary_function,
                            copy_string, decode, decode_bool, decode_nat, decode_stream, decode_string, encode,
                            encode_bool, encode_nat, encode_stream, encode_string, evaluate_polynomial,
                            library_hints, polynomial_function)
from lambda_calculus import App, apply, beta_normalize
from syntax import DecodeError, PreconditionError
from type_system import Arrow, typecheck


def test_booleans():
    assert decode_bool(TRUE) == 1
    assert decode_bool(FALSE) == 0
    assert decode_bool(App(NOT, TRUE)) == 0


@pytest.mark.parametrize("a", [0, 1])
@pytest.mark.parametrize("b", [0, 1])
def test_connectives(a, b):
    x, y = encode_bool(a), encode_bool(b)
    assert decode_bool(apply(OR, x, y)) == (a | b)
    assert decode_bool(apply(AND, x, y)) == (a & b)
    assert decode_bool(apply(XOR, x, y)) == (a ^ b)
    assert decode_bool(apply(binary_function("0110"), x, y)) == (a ^ b)


def test_arithmetic():
    two, three = encode_nat(2), encode_nat(3)
    assert decode_nat(apply(ADD, two, three)) == 5
    assert decode_nat(apply(MULT, two, three)) == 6
    assert evaluate_polynomial([1, 2, 3], 2) == 17
    assert decode_nat(App(polynomial_function([1, 2, 3]), two)) == 17


def test_strings():
    assert decode_string(encode_string("0110")) == "0110"
    assert decode_string(apply(SNOC, TRUE, encode_string("01"))) == "011"
    assert decode_nat(App(LENGTH, encode_string("0110"))) == 4
    pair = beta_normalize(App(copy_string(2), encode_string("10")))
    assert decode_string(pair.left) == "10"
    assert decode_string(pair.right) == "10"


def test_streams():
    assert decode_stream(encode_stream([1, 0]), 4) == "1010"
    assert decode(encode_stream([1]), "stream", length=3) == "111"
    assert encode("nat", 3).to_json()["value"] == 3


def test_encoding_errors():
    with pytest.raises(PreconditionError):
        encode_nat(-1)
    with pytest.raises(PreconditionError):
        encode_string("012")
    with pytest.raises(PreconditionError):
        binary_function("011")
    with pytest.raises(DecodeError):
        decode_bool(encode_nat(0))
    with pytest.raises(DecodeError):
        decode(TRUE, "tree")


def test_declared_types_check():
    assert typecheck(TRUE, BOOL).rule == "forall-i"
    assert typecheck(NOT, Arrow(BOOL, BOOL), hints=library_hints()).type == Arrow(BOOL, BOOL)
