# apps/reports/views.py

from drf_spectacular.types import OpenApiTypes
from drf_spectacular.utils import extend_schema
from rest_framework import permissions, status, viewsets
from rest_framework.decorators import action
from rest_framework.response import Response

from . import serializers as io
from .services import EXIT_OK, EXIT_UNVERIFIED, execute

STATUS_FOR_EXIT = {
    EXIT_OK: status.HTTP_200_OK,
    EXIT_UNVERIFIED: status.HTTP_409_CONFLICT,
}


def pencil_schema(summary, request, description=None):
    return extend_schema(
        tags=["Pencils"],
        summary=summary,
        description=description,
        request=request,
        responses={200: OpenApiTypes.OBJECT, 400: OpenApiTypes.OBJECT, 409: OpenApiTypes.OBJECT},
    )


class PencilViewSet(viewsets.ViewSet):
    """
    JSON mirror of the ``pencil`` management command.

    Every action answers with the same report the command prints with
    ``--json``: 200 when the result was verified, 409 when it was
    constructed but failed verification (the report still carries it) and
    400 for invalid input or a violated precondition.
    """

    permission_classes = [permissions.AllowAny]

    def _run(self, command, request):
        code, report = execute(command, request.data)
        return Response(report, status=STATUS_FOR_EXIT.get(code, status.HTTP_400_BAD_REQUEST))

    @pencil_schema("Analyze a pencil", io.PencilRequestSerializer)
    @action(detail=False, methods=["post"])
    def analyze(self, request):
        return self._run("analyze", request)

    @pencil_schema("Weierstrass canonical form", io.PencilRequestSerializer)
    @action(detail=False, methods=["post"])
    def wcf(self, request):
        return self._run("wcf", request)

    @pencil_schema(
        "Decompose a rank-one pencil",
        io.PencilRequestSerializer,
        "The body is a pencil file whose E and A hold F and G of sF - G.",
    )
    @action(detail=False, methods=["post"])
    def decompose(self, request):
        return self._run("decompose", request)

    @pencil_schema("Place eigenvalues", io.PlaceRequestSerializer)
    @action(detail=False, methods=["post"])
    def place(self, request):
        return self._run("place", request)

    @pencil_schema("Place eigenvalues with u and v fixed", io.RestrictedRequestSerializer)
    @action(detail=False, methods=["post"], url_path="place-restricted")
    def place_restricted(self, request):
        return self._run("place-restricted", request)

    @pencil_schema(
        "State feedback for a descriptor system",
        io.FeedbackRequestSerializer,
        "Returns f with u = f* x; for real systems f* is the plain transpose.",
    )
    @action(detail=False, methods=["post"])
    def feedback(self, request):
        return self._run("feedback", request)

    @pencil_schema("Build a pencil and a perturbation for two spectra", io.InverseRequestSerializer)
    @action(detail=False, methods=["post"])
    def inverse(self, request):
        return self._run("inverse", request)

    @pencil_schema("Check the perturbation bounds", io.BoundsRequestSerializer)
    @action(detail=False, methods=["post"], url_path="verify-bounds")
    def verify_bounds(self, request):
        return self._run("verify-bounds", request)
