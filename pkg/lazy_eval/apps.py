import sys

from django.apps import AppConfig
from django.conf import settings


class LazyEvalConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'lazy_eval'

    def ready(self):
        # syntax trees of Peano literals and long lists nest deeply
        limit = settings.LRP.get("RECURSION_LIMIT", 100000)
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)
