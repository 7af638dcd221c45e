"""
Django settings for the rescue_network project.

The project has no web surface and no database: every app is a simulation
module and the management commands in ``scenarios`` are the user surface.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.1/ref/settings/
"""

from pathlib import Path

from rescue_network.defaults import DEFAULTS

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing is signed.
SECRET_KEY = "rescue-network-batch-simulator"

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Modules
    "world",
    "engine",
    "netsim",
    "actors",
    "postquake",
    "scenarios",
    # Rest Framework
    "rest_framework",
]

DATABASES = {}


# Simulation

RESCUE_NETWORK = {
    "DEFAULTS": DEFAULTS,
    "TRACE_FORMAT_VERSION": 1,
    "FIXTURES_DIR": BASE_DIR / "scenarios" / "fixtures",
}


# Logging
# https://docs.djangoproject.com/en/4.1/topics/logging/

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "loggers": {
        name: {"handlers": ["console"], "level": "INFO", "propagate": False}
        for name in ("rescue_network", "world", "engine", "netsim", "actors", "postquake", "scenarios")
    },
}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
