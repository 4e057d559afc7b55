"""
Admin configuration for the harness run ledger.
"""

from django.contrib import admin
from django.utils.translation import gettext_lazy as _

from .models import EvaluationRun, ScenarioSet, TrainingRun


class EvaluationRunInline(admin.TabularInline):
    """Evaluations that used a scenario set."""

    model = EvaluationRun
    extra = 0
    fields = ("agent", "episodes", "deaths", "mean_stu_speed", "digest")
    readonly_fields = fields


@admin.register(ScenarioSet)
class ScenarioSetAdmin(admin.ModelAdmin):
    inlines = [EvaluationRunInline]
    list_display = (
        "name",
        "count",
        "episode_strips",
        "seed",
        "profile",
        "short_digest",
        "created_at",
    )
    list_filter = ("profile",)
    search_fields = ("name", "digest", "path")
    readonly_fields = ("created_at", "updated_at")

    @admin.display(description=_("digest"))
    def short_digest(self, obj):
        return obj.digest[:12]


@admin.register(TrainingRun)
class TrainingRunAdmin(admin.ModelAdmin):
    list_display = ("kind", "variant", "epochs", "final_loss", "seed", "profile", "created_at")
    list_filter = ("kind", "variant", "profile")
    search_fields = ("path", "digest")
    readonly_fields = ("created_at", "updated_at")
    fieldsets = (
        (_("Run"), {"fields": ("kind", "variant", "seed", "profile")}),
        (_("Artifact"), {"fields": ("path", "digest")}),
        (_("Results"), {"fields": ("epochs", "final_loss", "metrics")}),
        (_("Timestamps"), {"fields": ("created_at", "updated_at"), "classes": ("collapse",)}),
    )


@admin.register(EvaluationRun)
class EvaluationRunAdmin(admin.ModelAdmin):
    list_display = (
        "agent",
        "scenario_set",
        "episodes",
        "deaths",
        "death_rate_display",
        "mean_stu_speed",
        "created_at",
    )
    list_filter = ("agent", "profile")
    raw_id_fields = ("scenario_set", "training_run")
    readonly_fields = ("created_at", "updated_at")

    @admin.display(description=_("death rate"))
    def death_rate_display(self, obj):
        return f"{100 * obj.death_rate:.1f}%"
