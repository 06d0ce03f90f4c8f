from django.db.models import Count
from django.http import JsonResponse

from .models import ExperimentRun


def _run_header(run):
    return {
        'id': run.id,
        'name': run.name,
        'family': run.family,
        'gc_mode': run.gc_mode,
        'screm': run.screm,
        'created_at': run.created_at.isoformat(),
    }


def _run_with_rows(run):
    data = _run_header(run)
    data['rows'] = [
        {
            'k': row.k,
            'mln': row.mln,
            'mlnall': row.mlnall,
            'mspmax': row.mspmax,
            'gc_columns': row.gc_columns,
        }
        for row in run.rows.all()
    ]
    return data


def run_list_json(request):
    """All saved bench runs, newest first, with the number of measured rows."""
    runs = ExperimentRun.objects.annotate(row_count=Count('rows')).order_by('-created_at', '-id')
    data = []
    for run in runs:
        item = _run_header(run)
        item['row_count'] = run.row_count
        data.append(item)
    return JsonResponse({'runs': data})


def run_detail_json(request, run_id):
    run = ExperimentRun.objects.filter(pk=run_id).first()
    if run is None:
        return JsonResponse({'error': f'No experiment run with id {run_id}'}, status=404)
    return JsonResponse(_run_with_rows(run))


def latest_run_json(request):
    run = ExperimentRun.objects.first()
    if run is None:
        return JsonResponse({'error': 'No experiment runs available'}, status=404)
    return JsonResponse(_run_with_rows(run))
