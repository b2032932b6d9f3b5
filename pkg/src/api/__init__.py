"""FastAPI backend application"""





