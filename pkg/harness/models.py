"""
Run ledger models for the pickling line project.

Every CLI run that writes an artifact (scenario set, trained model,
evaluation log) leaves a row here with its digest, seed and profile, so runs
can be compared in the Django admin.
"""

from django.core.validators import MinValueValidator
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.models import DigestedArtifactModel


class ScenarioSet(DigestedArtifactModel):
    """A precomputed list of episode scenarios shared by every agent."""

    name = models.CharField(_("name"), max_length=100)
    count = models.PositiveIntegerField(
        _("scenario count"),
        validators=[MinValueValidator(1)],
    )
    episode_strips = models.PositiveIntegerField(_("strips per episode"), default=20)

    class Meta:
        verbose_name = _("scenario set")
        verbose_name_plural = _("scenario sets")
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.name} ({self.count} scenarios, {self.digest[:12]})"


class TrainingKind(models.TextChoices):
    GRADE_MODEL = "GRADE_MODEL", _("Grade sequence model")
    CGAN = "CGAN", _("Conditional GAN")
    RL_BANK = "RL_BANK", _("Q-network bank")


class TrainingRun(DigestedArtifactModel):
    """A trained model checkpoint and its headline training metrics."""

    kind = models.CharField(
        _("kind"),
        max_length=20,
        choices=TrainingKind.choices,
    )
    variant = models.CharField(
        _("variant"),
        max_length=20,
        blank=True,
        help_text=_("RL variant (p_coop / f_coop), empty for data models"),
    )
    epochs = models.PositiveIntegerField(_("epochs or episodes"), default=0)
    final_loss = models.FloatField(_("final loss"), null=True, blank=True)
    metrics = models.JSONField(_("metrics"), default=dict, blank=True)

    class Meta:
        verbose_name = _("training run")
        verbose_name_plural = _("training runs")
        ordering = ["-created_at"]

    def __str__(self):
        label = f"{self.get_kind_display()}"
        if self.variant:
            label += f" {self.variant}"
        return f"{label} seed={self.seed}"


class EvaluationRun(DigestedArtifactModel):
    """One agent evaluated on one scenario set."""

    agent = models.CharField(_("agent"), max_length=20)
    scenario_set = models.ForeignKey(
        ScenarioSet,
        on_delete=models.PROTECT,
        related_name="evaluations",
        null=True,
        blank=True,
    )
    training_run = models.ForeignKey(
        TrainingRun,
        on_delete=models.SET_NULL,
        related_name="evaluations",
        null=True,
        blank=True,
    )
    episodes = models.PositiveIntegerField(_("episodes"), default=0)
    deaths = models.PositiveIntegerField(_("deaths"), default=0)
    mean_stu_speed = models.FloatField(_("mean STU speed"), null=True, blank=True)
    metrics = models.JSONField(_("metrics"), default=dict, blank=True)

    class Meta:
        verbose_name = _("evaluation run")
        verbose_name_plural = _("evaluation runs")
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.agent} on {self.scenario_set_id or '-'} ({self.deaths} deaths)"

    @property
    def death_rate(self):
        if not self.episodes:
            return 0.0
        return self.deaths / self.episodes
