"""
URL configuration for pickling_line project.

Only the admin is routed: it browses the run ledger (scenario sets, training
and evaluation runs).
"""

from django.contrib import admin
from django.urls import path

admin.site.site_header = "Pickling Line Twin"
admin.site.site_title = "Pickling Line Admin"
admin.site.index_title = "Run ledger"

urlpatterns = [
    path("admin/", admin.site.urls),
]
