# Generated by Django 5.2.11 on 2026-10-19 09:00

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


def artifact_fields():
    return [
        ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
        ('created_at', models.DateTimeField(auto_now_add=True, help_text='Date and time when the record was created')),
        ('updated_at', models.DateTimeField(auto_now=True, help_text='Date and time when the record was last updated')),
        ('path', models.CharField(help_text='Location of the artifact on disk', max_length=500)),
        ('digest', models.CharField(blank=True, help_text='SHA-256 hex digest of the artifact', max_length=64)),
        ('seed', models.BigIntegerField(default=0, help_text='Master seed of the run that produced the artifact')),
        ('profile', models.CharField(default='desk', max_length=20)),
    ]


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ScenarioSet',
            fields=artifact_fields() + [
                ('name', models.CharField(max_length=100, verbose_name='name')),
                ('count', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)], verbose_name='scenario count')),
                ('episode_strips', models.PositiveIntegerField(default=20, verbose_name='strips per episode')),
            ],
            options={
                'verbose_name': 'scenario set',
                'verbose_name_plural': 'scenario sets',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='TrainingRun',
            fields=artifact_fields() + [
                ('kind', models.CharField(choices=[('GRADE_MODEL', 'Grade sequence model'), ('CGAN', 'Conditional GAN'), ('RL_BANK', 'Q-network bank')], max_length=20, verbose_name='kind')),
                ('variant', models.CharField(blank=True, help_text='RL variant (p_coop / f_coop), empty for data models', max_length=20, verbose_name='variant')),
                ('epochs', models.PositiveIntegerField(default=0, verbose_name='epochs or episodes')),
                ('final_loss', models.FloatField(blank=True, null=True, verbose_name='final loss')),
                ('metrics', models.JSONField(blank=True, default=dict, verbose_name='metrics')),
            ],
            options={
                'verbose_name': 'training run',
                'verbose_name_plural': 'training runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='EvaluationRun',
            fields=artifact_fields() + [
                ('agent', models.CharField(max_length=20, verbose_name='agent')),
                ('episodes', models.PositiveIntegerField(default=0, verbose_name='episodes')),
                ('deaths', models.PositiveIntegerField(default=0, verbose_name='deaths')),
                ('mean_stu_speed', models.FloatField(blank=True, null=True, verbose_name='mean STU speed')),
                ('metrics', models.JSONField(blank=True, default=dict, verbose_name='metrics')),
                ('scenario_set', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.PROTECT, related_name='evaluations', to='harness.scenarioset')),
                ('training_run', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='evaluations', to='harness.trainingrun')),
            ],
            options={
                'verbose_name': 'evaluation run',
                'verbose_name_plural': 'evaluation runs',
                'ordering': ['-created_at'],
            },
        ),
    ]
