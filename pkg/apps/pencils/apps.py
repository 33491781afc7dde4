from django.apps import AppConfig


class PencilsConfig(AppConfig):
    name = "apps.pencils"
    verbose_name = "Matrix pencils"
