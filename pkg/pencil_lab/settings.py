"""
Django settings for pencil_lab project.

There is no database: the apps compute on request data only.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("SECRET_KEY", "django-insecure-fallback-key")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv("DEBUG", "False").lower() in ("true", "1", "yes")

allowed_hosts_env = os.getenv("ALLOWED_HOSTS")
if allowed_hosts_env:
    ALLOWED_HOSTS = allowed_hosts_env.split(",")
elif DEBUG:
    ALLOWED_HOSTS = ["localhost", "127.0.0.1"]
else:
    ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "rest_framework",
    "drf_spectacular",
    "apps.pencils.apps.PencilsConfig",
    "apps.placement.apps.PlacementConfig",
    "apps.reports.apps.ReportsConfig",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
]

ROOT_URLCONF = "pencil_lab.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {"context_processors": ["django.template.context_processors.request"]},
    },
]

WSGI_APPLICATION = "pencil_lab.wsgi.application"

DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True


SPECTACULAR_SETTINGS = {
    "TITLE": "Pencil Lab API",
    "DESCRIPTION": (
        "Spectral structure of regular matrix pencils sE - A, eigenvalue placement "
        "by rank-one pencils and state feedback for descriptor systems."
    ),
    "VERSION": "1.0.0",
    "SERVE_INCLUDE_SCHEMA": True,
    "LICENSE": {"name": "MIT License"},
    "TAGS": [
        {"name": "Pencils", "description": "Analysis, placement and bound checks"},
    ],
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": (),
    "DEFAULT_PERMISSION_CLASSES": ("rest_framework.permissions.AllowAny",),
    "DEFAULT_RENDERER_CLASSES": ("rest_framework.renderers.JSONRenderer",),
    "DEFAULT_PARSER_CLASSES": ("rest_framework.parsers.JSONParser",),
    "UNAUTHENTICATED_USER": None,
    "DEFAULT_SCHEMA_CLASS": "drf_spectacular.openapi.AutoSchema",
}


def _env(key, default, cast=float):
    value = os.getenv(f"PENCIL_{key}")
    return default if value in (None, "") else cast(value)


PENCIL_LAB = {
    "TOL_RANK": _env("TOL_RANK", 1e-9),
    "TOL_CLUSTER": _env("TOL_CLUSTER", 1e-7),
    "TOL_REGULAR": _env("TOL_REGULAR", 1e-10),
    "TOL_MATCH": _env("TOL_MATCH", 1e-6),
    "TOL_RESIDUAL": _env("TOL_RESIDUAL", 1e-8),
    "COND_LIMIT": _env("COND_LIMIT", 1e12),
    "DET_SAMPLES": _env("DET_SAMPLES", 7, int),
    "SEED": _env("SEED", None, int),
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "{levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "loggers": {
        "apps": {
            "handlers": ["console"],
            "level": os.getenv("PENCIL_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}
