from django.apps import AppConfig


class PostquakeConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "postquake"
