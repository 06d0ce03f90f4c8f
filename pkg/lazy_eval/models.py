from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    name = models.CharField(
        max_length=100,
        help_text="Program variant that was measured, e.g. foldl or unshared"
    )
    family = models.CharField(
        max_length=50,
        help_text="Bench experiment the variant belongs to, e.g. fold"
    )
    gc_mode = models.CharField(
        max_length=30,
        default="eager",
        help_text="Garbage collection schedule: eager, every:N or never"
    )
    screm = models.BooleanField(
        default=True,
        help_text="Whether adjacent update markers were merged"
    )
    created_at = models.DateTimeField(
        default=timezone.now,
        help_text="Timestamp of when the bench run was saved"
    )

    def __str__(self):
        local_time = timezone.localtime(self.created_at)
        return f"{self.family}/{self.name} run at {local_time.strftime('%Y-%m-%d %H:%M:%S %Z')}"

    class Meta:
        ordering = ['-created_at', '-id']


class MeasureRecord(models.Model):
    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='rows'
    )
    k = models.PositiveIntegerField(help_text="Input size parameter")
    # differences of two programs can be negative
    mln = models.BigIntegerField()
    mlnall = models.BigIntegerField()
    mspmax = models.BigIntegerField()
    gc_columns = models.JSONField(
        null=True,
        blank=True,
        help_text="Space difference per GC schedule (difference runs only)"
    )

    def __str__(self):
        return f"k={self.k} mln={self.mln} mlnall={self.mlnall} mspmax={self.mspmax}"

    class Meta:
        ordering = ['run', 'k']
