# lazy_eval/admin.py
from django.contrib import admin
from .models import ExperimentRun, MeasureRecord

admin.site.register(ExperimentRun)
admin.site.register(MeasureRecord)
