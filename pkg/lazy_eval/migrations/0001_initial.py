import django.db.models.deletion
import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(help_text='Program variant that was measured, e.g. foldl or unshared', max_length=100)),
                ('family', models.CharField(help_text='Bench experiment the variant belongs to, e.g. fold', max_length=50)),
                ('gc_mode', models.CharField(default='eager', help_text='Garbage collection schedule: eager, every:N or never', max_length=30)),
                ('screm', models.BooleanField(default=True, help_text='Whether adjacent update markers were merged')),
                ('created_at', models.DateTimeField(default=django.utils.timezone.now, help_text='Timestamp of when the bench run was saved')),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='MeasureRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('k', models.PositiveIntegerField(help_text='Input size parameter')),
                ('mln', models.BigIntegerField()),
                ('mlnall', models.BigIntegerField()),
                ('mspmax', models.BigIntegerField()),
                ('gc_columns', models.JSONField(blank=True, help_text='Space difference per GC schedule (difference runs only)', null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='lazy_eval.experimentrun')),
            ],
            options={
                'ordering': ['run', 'k'],
            },
        ),
    ]
