from django.urls import path
from . import views

urlpatterns = [
    path('api/runs/', views.run_list_json, name='run_list_json'),
    path('api/runs/latest/', views.latest_run_json, name='latest_run_json'),
    path('api/runs/<int:run_id>/', views.run_detail_json, name='run_detail_json'),
]
