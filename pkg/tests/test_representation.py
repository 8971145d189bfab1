import pytest

from representation import (B, N, S, apply_inputs, bool_proof, decode_bool, decode_nat, decode_string,
                            decode_value, encode_for, identity_proof, nat_proof, not_proof, string_proof)
from syntax import ONE, DecodeError, PreconditionError, alpha_eq, lolli


@pytest.mark.parametrize("bit", [0, 1])
def test_booleans_read_back(bit):
    proof = bool_proof(bit)
    assert proof.conclusion == (B,)
    assert decode_bool(proof) == bit


@pytest.mark.parametrize("s", ["", "0", "10", "0110"])
def test_strings_read_back(s):
    proof = string_proof(s)
    assert alpha_eq(proof.conclusion[0], S)
    assert decode_string(proof) == s


@pytest.mark.parametrize("n", [0, 1, 3])
def test_numerals_read_back(n):
    proof = nat_proof(n)
    assert alpha_eq(proof.conclusion[0], N)
    assert decode_nat(proof) == n


def test_decode_value_infers_the_kind():
    assert decode_value(bool_proof(0)) == 0
    assert decode_value(nat_proof(2)) == 2
    assert decode_value(string_proof("01")) == "01"


def test_encoders_reject_bad_values():
    with pytest.raises(PreconditionError):
        string_proof("012")
    with pytest.raises(PreconditionError):
        nat_proof(-1)
    with pytest.raises(PreconditionError):
        encode_for("01", ONE)


def test_encode_for_dispatches_on_the_formula():
    assert encode_for(1, B) == bool_proof(1)
    assert encode_for(2, N) == nat_proof(2)
    assert encode_for("1", S) == string_proof("1")


def test_negation_has_the_boolean_function_type():
    assert alpha_eq(not_proof().conclusion[0], lolli(B, B))


def test_apply_inputs_stacks_cuts():
    applied = apply_inputs(identity_proof(B), [1])
    assert applied.rule == "cut"
    assert applied.conclusion == (B,)
    with pytest.raises(DecodeError):
        decode_bool(applied)
    with pytest.raises(PreconditionError):
        apply_inputs(bool_proof(1), [1])
