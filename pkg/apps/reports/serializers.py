# apps/reports/serializers.py
"""
File formats and report shapes.

Matrices are row-major lists; a complex entry is a plain number or an
``[re, im]`` pair, and ``"a+bi"`` literals are accepted on input. Infinity
is written ``"inf"`` and is only valid where an extended-complex value is
expected (targets, eigenvalues).
"""

import re

import numpy as np
from rest_framework import serializers

from apps.pencils.core import INFINITY, Pencil, is_infinite
from apps.pencils.exceptions import PencilError
from apps.pencils.rank_one import RankOneForm, RankOnePencil, decompose

FORMAT_VERSION = "1"

_BARE_UNIT = re.compile(r"(^|[+-])j$")


def parse_complex(value):
    """Number, ``[re, im]`` pair, ``"a+bi"`` literal or ``"inf"``; raises ``ValueError``."""
    if isinstance(value, bool):
        raise ValueError(f"{value!r} is not a number")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, (list, tuple)):
        if len(value) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            raise ValueError(f"{value!r} is not an [re, im] pair")
        return complex(value[0], value[1])
    if isinstance(value, str):
        text = value.strip().lower().replace(" ", "")
        if text in ("inf", "+inf", "infinity"):
            return INFINITY
        text = _BARE_UNIT.sub(r"\g<1>1j", text.replace("i", "j"))
        return complex(text)
    raise ValueError(f"{value!r} is not a complex literal")


def encode_complex(value):
    """Inverse of :func:`parse_complex` for report output."""
    if value is None:
        return None
    value = complex(value)
    if is_infinite(value):
        return "inf"
    if value.imag == 0:
        return float(value.real)
    return [float(value.real), float(value.imag)]


def parse_targets(text):
    """``"1:1,-1:1,inf:2,1+2i:1"`` into ``((mu, m), ...)``."""
    targets = []
    for item in filter(None, (part.strip() for part in text.split(","))):
        value, sep, multiplicity = item.rpartition(":")
        if not sep:
            raise ValueError(f"target {item!r} is not of the form value:multiplicity")
        targets.append((parse_complex(value), int(multiplicity)))
    return tuple(targets)


class ComplexField(serializers.Field):
    default_error_messages = {
        "invalid": "Expected a number, an [re, im] pair or an 'a+bi' literal.",
        "infinite": "Infinity is not allowed here.",
    }

    def __init__(self, allow_infinity=False, **kwargs):
        self.allow_infinity = allow_infinity
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        try:
            value = parse_complex(data)
        except ValueError:
            self.fail("invalid")
        if is_infinite(value) and not self.allow_infinity:
            self.fail("infinite")
        return value

    def to_representation(self, value):
        return encode_complex(value)


class VectorField(serializers.ListField):
    child = ComplexField()

    def __init__(self, **kwargs):
        kwargs.setdefault("allow_empty", False)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        return np.asarray(super().to_internal_value(data), dtype=complex)

    def to_representation(self, value):
        return [encode_complex(x) for x in np.ravel(value)]


class MatrixField(serializers.Field):
    default_error_messages = {
        "not_a_list": "Expected a list of rows.",
        "ragged": "Row {row} has {got} entries, expected {expected}.",
        "entry": "Entry ({row}, {col}): {message}",
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
            self.fail("not_a_list")
        width = len(data[0]) if data else 0
        entry = ComplexField()
        out = np.zeros((len(data), width), dtype=complex)
        for i, row in enumerate(data):
            if len(row) != width:
                self.fail("ragged", row=i, got=len(row), expected=width)
            for j, value in enumerate(row):
                try:
                    out[i, j] = entry.to_internal_value(value)
                except serializers.ValidationError as exc:
                    self.fail("entry", row=i, col=j, message=exc.detail[0])
        return out

    def to_representation(self, value):
        return [[encode_complex(x) for x in row] for row in np.asarray(value)]


class PolynomialField(serializers.Field):
    """Coefficients in ascending order."""

    def to_representation(self, value):
        return [encode_complex(c) for c in value.coeffs]


class TargetsField(serializers.Field):
    """Either the ``value:multiplicity`` string or a list of ``[value, multiplicity]``."""

    default_error_messages = {"invalid": "Bad target list: {message}"}

    def to_internal_value(self, data):
        try:
            if isinstance(data, str):
                return parse_targets(data)
            return tuple((parse_complex(value), int(m)) for value, m in data)
        except (TypeError, ValueError) as exc:
            self.fail("invalid", message=str(exc))

    def to_representation(self, value):
        return [[encode_complex(mu), m] for mu, m in value]


# input formats


class PencilFileSerializer(serializers.Serializer):
    format_version = serializers.CharField(default=FORMAT_VERSION)
    n = serializers.IntegerField(min_value=1, required=False)
    E = MatrixField()
    A = MatrixField()
    b = VectorField(required=False)

    def validate_format_version(self, value):
        if value != FORMAT_VERSION:
            raise serializers.ValidationError(f"Unsupported format version {value!r}.")
        return value

    def validate(self, attrs):
        n = attrs.get("n", attrs["E"].shape[0])
        if n < 1:
            raise serializers.ValidationError({"E": "The pencil needs at least one row."})
        for name in ("E", "A"):
            if attrs[name].shape != (n, n):
                raise serializers.ValidationError({name: f"Expected a {n}x{n} matrix, got {attrs[name].shape}."})
        if "b" in attrs and attrs["b"].size != n:
            raise serializers.ValidationError({"b": f"Expected {n} entries, got {attrs['b'].size}."})
        attrs["n"] = n
        attrs["pencil"] = Pencil(attrs["E"], attrs["A"])
        return attrs


class RankOneFileSerializer(serializers.Serializer):
    """Structured factors (``form``, ``u``, ``v``, ``w``, ``alpha``, ``beta``) or raw ``F``, ``G``."""

    format_version = serializers.CharField(default=FORMAT_VERSION)
    form = serializers.ChoiceField(choices=RankOneForm.choices, required=False)
    u = VectorField(required=False)
    v = VectorField(required=False)
    w = VectorField(required=False)
    alpha = ComplexField(default=0)
    beta = ComplexField(default=0)
    F = MatrixField(required=False)
    G = MatrixField(required=False)

    def validate(self, attrs):
        try:
            if "F" in attrs or "G" in attrs:
                if not ("F" in attrs and "G" in attrs):
                    raise serializers.ValidationError("Give both F and G.")
                attrs["rank_one"] = decompose(attrs["F"], attrs["G"])
            elif "form" in attrs and "w" in attrs:
                attrs["rank_one"] = RankOnePencil(
                    attrs["form"],
                    attrs.get("u"),
                    attrs.get("v"),
                    attrs["w"],
                    attrs["alpha"],
                    attrs["beta"],
                )
            else:
                raise serializers.ValidationError("Give either F and G or form and w.")
        except PencilError as exc:
            raise serializers.ValidationError(exc.as_dict()) from exc
        return attrs


# command requests


class OptionsSerializer(serializers.Serializer):
    tol_rank = serializers.FloatField(min_value=0, required=False, allow_null=True)
    tol_cluster = serializers.FloatField(min_value=0, required=False, allow_null=True)
    seed = serializers.IntegerField(required=False, allow_null=True)
    real = serializers.BooleanField(default=False)


class PencilRequestSerializer(OptionsSerializer, PencilFileSerializer):
    pass


class PlaceRequestSerializer(PencilRequestSerializer):
    targets = TargetsField()


class RestrictedRequestSerializer(PlaceRequestSerializer):
    u = VectorField(required=False, allow_null=True)
    v = VectorField(required=False, allow_null=True)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        for name in ("u", "v"):
            if attrs.get(name) is not None and attrs[name].size != attrs["n"]:
                raise serializers.ValidationError({name: f"Expected {attrs['n']} entries."})
        return attrs


class FeedbackRequestSerializer(PlaceRequestSerializer):
    real = serializers.BooleanField(default=None, allow_null=True)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if "b" not in attrs:
            raise serializers.ValidationError({"b": "A feedback system needs the input vector b."})
        return attrs


class InverseRequestSerializer(OptionsSerializer):
    before = TargetsField()
    after = TargetsField()


class BoundsRequestSerializer(OptionsSerializer):
    pencil = PencilFileSerializer()
    rank_one = RankOneFileSerializer()


class TrialsRequestSerializer(OptionsSerializer):
    kind = serializers.ChoiceField(choices=["bounds", "place", "restricted", "feedback", "inverse"])
    count = serializers.IntegerField(min_value=1, default=50)
    size_min = serializers.IntegerField(min_value=1, default=2)
    size_max = serializers.IntegerField(min_value=1, default=5)

    def validate(self, attrs):
        if attrs["size_min"] > attrs["size_max"]:
            raise serializers.ValidationError({"size_max": "Must not be below size_min."})
        return attrs


# reports


class EigStructureSerializer(serializers.Serializer):
    lam = ComplexField(allow_infinity=True)
    segre = serializers.ListField(child=serializers.IntegerField())
    root_dim = serializers.IntegerField()
    geometric = serializers.IntegerField()
    m1 = serializers.IntegerField()
    nullity_tower = serializers.ListField(child=serializers.IntegerField())


class SpectralDataSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    M = serializers.IntegerField()
    eigs = EigStructureSerializer(many=True)
    m_A = PolynomialField()
    det_poly = PolynomialField()


class BlockSerializer(serializers.Serializer):
    lam = ComplexField(allow_infinity=True)
    length = serializers.IntegerField()
    offset = serializers.IntegerField()
    width = serializers.IntegerField()
    infinite = serializers.BooleanField()
    leading = serializers.BooleanField()


class WeierstrassSerializer(serializers.Serializer):
    r = serializers.IntegerField()
    real_form = serializers.BooleanField()
    cond = serializers.FloatField()
    blocks = BlockSerializer(many=True)
    S = MatrixField()
    T = MatrixField()
    J = MatrixField()
    N = MatrixField()


class RankOnePencilSerializer(serializers.Serializer):
    form = serializers.CharField()
    label = serializers.CharField(source="form.label")
    u = VectorField()
    v = VectorField()
    w = VectorField()
    alpha = ComplexField()
    beta = ComplexField()


class PlacementResultSerializer(serializers.Serializer):
    verified = serializers.BooleanField()
    perturbation = RankOnePencilSerializer(allow_null=True)
    alpha = ComplexField(allow_null=True)
    beta = ComplexField(allow_null=True)
    gamma = ComplexField()
    q_gamma = PolynomialField()
    w = VectorField(allow_null=True)
    v = VectorField(allow_null=True)
    predicted = serializers.SerializerMethodField()
    achieved = SpectralDataSerializer(allow_null=True)
    residual = serializers.FloatField()
    det_residual = serializers.FloatField()
    messages = serializers.ListField(child=serializers.CharField())

    def get_predicted(self, obj):
        return [{"lam": encode_complex(lam), "root_dim": int(dim)} for lam, dim in obj.predicted]


class PoleProfileSerializer(serializers.Serializer):
    M_uv = serializers.IntegerField()
    m_tilde = PolynomialField()
    orders = serializers.SerializerMethodField()

    def get_orders(self, obj):
        return [{"lam": encode_complex(lam), "order": int(order)} for lam, order in obj.orders]


class HautusVerdictSerializer(serializers.Serializer):
    controllable = serializers.BooleanField()
    witness = ComplexField(allow_null=True)
    characterization = serializers.BooleanField()
    agrees = serializers.BooleanField()


class RegularityVerdictSerializer(serializers.Serializer):
    kind = serializers.CharField()
    label = serializers.CharField(source="kind.label")
    eigenvalue = ComplexField(allow_infinity=True, allow_null=True)


class BoundRecordSerializer(serializers.Serializer):
    check = serializers.CharField()
    lam = ComplexField(allow_infinity=True, allow_null=True)
    k = serializers.IntegerField(allow_null=True)
    before = serializers.IntegerField()
    after = serializers.IntegerField()
    lower = serializers.IntegerField()
    upper = serializers.IntegerField()
    satisfied = serializers.BooleanField()
    slack = serializers.IntegerField()


class BoundsReportSerializer(serializers.Serializer):
    title = serializers.CharField()
    overall_pass = serializers.BooleanField()
    records = BoundRecordSerializer(many=True)
