"""
Django base settings for pickling_line project.

Shared settings for all environments (development, production, testing).
Every tunable of the line twin, the agents and the synthesis models is
declared in ``PICKLING_LINE`` below and can be overridden from the
environment, from a profile or from an INI run config.
"""

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config(
    "SECRET_KEY",
    default="django-insecure-change-me-in-production-use-a-real-secret-key",
)

# Application definition
DJANGO_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
]

LOCAL_APPS = [
    "core.apps.CoreConfig",
    "nn.apps.NnConfig",
    "strips.apps.StripsConfig",
    "synthesis.apps.SynthesisConfig",
    "line.apps.LineConfig",
    "agents.apps.AgentsConfig",
    "harness.apps.HarnessConfig",
]

INSTALLED_APPS = DJANGO_APPS + LOCAL_APPS

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "pickling_line.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.debug",
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "pickling_line.wsgi.application"

# Internationalization
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

STATIC_URL = "/static/"
STATIC_ROOT = BASE_DIR / "staticfiles"

# Default primary key field type
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ============================================================
# Pickling line configuration
# ============================================================
# Active profile ("desk" or "full"), see core/profiles.py
PICKLING_PROFILE = config("PICKLING_PROFILE", default="desk")

PICKLING_LINE = {
    # Run
    "seed": config("SEED", default=0, cast=int),
    # Strip domain
    "steel_density": config("STEEL_DENSITY", default=7850.0, cast=float),
    "length_min": config("LENGTH_MIN", default=100.0, cast=float),
    "length_max": config("LENGTH_MAX", default=1500.0, cast=float),
    "speed_table_path": config("SPEED_TABLE_PATH", default=""),
    "history_strips": config("HISTORY_STRIPS", default=500, cast=int),
    "history_grades": config("HISTORY_GRADES", default=5, cast=int),
    # Neural-network substrate
    "leaky_relu_slope": config("LEAKY_RELU_SLOPE", default=0.2, cast=float),
    "adam_beta1": config("ADAM_BETA1", default=0.9, cast=float),
    "adam_beta2": config("ADAM_BETA2", default=0.999, cast=float),
    "adam_epsilon": config("ADAM_EPSILON", default=1e-8, cast=float),
    "step_size_decay": config("STEP_SIZE_DECAY", default=0.003, cast=float),
    "step_size_floor": config("STEP_SIZE_FLOOR", default=1e-4, cast=float),
    # multiplicative: a*(1-d), absolute: a-d, scale: a*d
    "step_size_decay_mode": config("STEP_SIZE_DECAY_MODE", default="multiplicative"),
    # Grade sequence model
    "grade_hidden_units": config("GRADE_HIDDEN_UNITS", default=64, cast=int),
    "grade_dropout": config("GRADE_DROPOUT", default=0.2, cast=float),
    "grade_sequence_length": config("GRADE_SEQUENCE_LENGTH", default=20, cast=int),
    "grade_batch_size": config("GRADE_BATCH_SIZE", default=256, cast=int),
    "grade_epochs": config("GRADE_EPOCHS", default=500, cast=int),
    "grade_learning_rate": config("GRADE_LEARNING_RATE", default=0.001, cast=float),
    "grade_temperature": config("GRADE_TEMPERATURE", default=1.0, cast=float),
    # Conditional GAN
    "cgan_noise_length": config("CGAN_NOISE_LENGTH", default=32, cast=int),
    "cgan_window_length": config("CGAN_WINDOW_LENGTH", default=16, cast=int),
    "cgan_discriminator_ratio": config("CGAN_DISCRIMINATOR_RATIO", default=2, cast=int),
    "cgan_label_smoothing": config("CGAN_LABEL_SMOOTHING", default=0.9, cast=float),
    "cgan_epochs": config("CGAN_EPOCHS", default=2000, cast=int),
    "cgan_batch_size": config("CGAN_BATCH_SIZE", default=64, cast=int),
    "cgan_learning_rate": config("CGAN_LEARNING_RATE", default=2e-4, cast=float),
    "cgan_collapse_ratio": config("CGAN_COLLAPSE_RATIO", default=0.1, cast=float),
    "cgan_collapse_patience": config("CGAN_COLLAPSE_PATIENCE", default=50, cast=int),
    # Kinematic environment (units: m, m/min, s)
    "episode_strips": config("EPISODE_STRIPS", default=20, cast=int),
    "looper1_lower": config("LOOPER1_LOWER", default=20.0, cast=float),
    "looper1_upper": config("LOOPER1_UPPER", default=400.0, cast=float),
    "looper2_lower": config("LOOPER2_LOWER", default=10.0, cast=float),
    "looper2_upper": config("LOOPER2_UPPER", default=200.0, cast=float),
    "sync_threshold_fraction": config("SYNC_THRESHOLD_FRACTION", default=0.1, cast=float),
    "sync_hysteresis": config("SYNC_HYSTERESIS", default=1.0, cast=float),
    "ftu_max_speed": config("FTU_MAX_SPEED", default=250.0, cast=float),
    "ttu_max_speed": config("TTU_MAX_SPEED", default=250.0, cast=float),
    "ramp_limit": config("RAMP_LIMIT", default=10.0, cast=float),
    "slowdown_residual": config("SLOWDOWN_RESIDUAL", default=50.0, cast=float),
    "slowdown_speed": config("SLOWDOWN_SPEED", default=30.0, cast=float),
    "stu_length": config("STU_LENGTH", default=300.0, cast=float),
    "emergency_braking": config("EMERGENCY_BRAKING", default=True, cast=bool),
    "braking_horizon": config("BRAKING_HORIZON", default=30, cast=int),
    "max_steps": config("MAX_STEPS", default=40000, cast=int),
    # Disturbance model
    "weld_mean": config("WELD_MEAN", default=180.0, cast=float),
    "weld_sd": config("WELD_SD", default=30.0, cast=float),
    "weld_min": config("WELD_MIN", default=120.0, cast=float),
    "cut_mean": config("CUT_MEAN", default=60.0, cast=float),
    "cut_sd": config("CUT_SD", default=15.0, cast=float),
    "cut_min": config("CUT_MIN", default=30.0, cast=float),
    "prediction_sd": config("PREDICTION_SD", default=10.0, cast=float),
    "planning_sds": config("PLANNING_SDS", default=3.0, cast=float),
    "presampled_events": config("PRESAMPLED_EVENTS", default=128, cast=int),
    # Conservative agent
    "c_margin": config("C_MARGIN", default=15.0, cast=float),
    "c_horizon": config("C_HORIZON", default=300, cast=int),
    "c_safety_factor": config("C_SAFETY_FACTOR", default=1.2, cast=float),
    "c_grid_step": config("C_GRID_STEP", default=1.0, cast=float),
    # RL agents
    "rl_gamma": config("RL_GAMMA", default=0.95, cast=float),
    "rl_step_size": config("RL_STEP_SIZE", default=0.01, cast=float),
    "rl_l1": config("RL_L1", default=1e-4, cast=float),
    "rl_epsilon_start": config("RL_EPSILON_START", default=0.9, cast=float),
    "rl_epsilon_end": config("RL_EPSILON_END", default=0.05, cast=float),
    "rl_death_penalty": config("RL_DEATH_PENALTY", default=-1000.0, cast=float),
    "rl_action_weight": config("RL_ACTION_WEIGHT", default=1.0, cast=float),
    "rl_proximity_weight": config("RL_PROXIMITY_WEIGHT", default=1.0, cast=float),
    "rl_proximity_margin": config("RL_PROXIMITY_MARGIN", default=50.0, cast=float),
    "rl_intra_period": config("RL_INTRA_PERIOD", default=30, cast=int),
    # Harness
    "phase1_episodes": config("PHASE1_EPISODES", default=800, cast=int),
    "phase2_episodes": config("PHASE2_EPISODES", default=200, cast=int),
    "report_window": config("REPORT_WINDOW", default=100, cast=int),
    "eval_episodes": config("EVAL_EPISODES", default=100, cast=int),
    "eval_workers": config("EVAL_WORKERS", default=1, cast=int),
}

# ============================================================
# Logging Configuration
# ============================================================
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "file": {
            "class": "logging.FileHandler",
            "filename": BASE_DIR / "logs" / "pickling_line.log",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "INFO",
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": config("DJANGO_LOG_LEVEL", default="INFO"),
            "propagate": False,
        },
        "pickling_line": {
            "handlers": ["console", "file"],
            "level": "DEBUG",
            "propagate": False,
        },
    },
}

# App loggers share the project handlers (modules log via getLogger(__name__))
for _app in ("core", "nn", "strips", "synthesis", "line", "agents", "harness"):
    LOGGING["loggers"][_app] = {
        "handlers": ["console", "file"],
        "level": config("PICKLING_LOG_LEVEL", default="INFO"),
        "propagate": False,
    }

# Create logs directory if it doesn't exist
LOGS_DIR = BASE_DIR / "logs"
LOGS_DIR.mkdir(exist_ok=True)
