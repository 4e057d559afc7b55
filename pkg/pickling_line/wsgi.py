"""
WSGI config for pickling_line project.

Serves the Django admin over the run ledger. It exposes the WSGI callable as a
module-level variable named ``application``.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "pickling_line.settings")

application = get_wsgi_application()
