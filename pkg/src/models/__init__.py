# Pydantic models package

