from django.urls import include, path
from drf_spectacular.views import SpectacularAPIView

urlpatterns = [
    path("api/v1/", include("apps.reports.urls")),
    path("api/schema.yaml", SpectacularAPIView.as_view(), name="schema"),
]
