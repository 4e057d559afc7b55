from django.apps import AppConfig


class StripsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "strips"
    verbose_name = "Strips & Speed Table"
