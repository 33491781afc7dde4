from django.urls import include, path
from rest_framework.routers import DefaultRouter

from .views import PencilViewSet

router = DefaultRouter()
router.register(r"pencils", PencilViewSet, basename="pencil")

urlpatterns = [
    path("", include(router.urls)),
]
