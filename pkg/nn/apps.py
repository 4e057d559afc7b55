from django.apps import AppConfig


class NnConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "nn"
    verbose_name = "Neural network substrate"
