import os
from pydantic import BaseModel
from dotenv import load_dotenv

load_dotenv()

class Config(BaseModel):
    # Truncation window for cone acyclicity checks
    window: int = 3
    # Cell-path search bound for connectivity and generation witnesses
    witness_search_bound: int = 20000
    max_repair_rounds: int = 12
    log_level: str = "INFO"
    dot_rankdir: str = "LR"

    @classmethod
    def from_env(cls) -> "Config":
        return cls(
            window=int(os.getenv("WINDOW", "3")),
            witness_search_bound=int(os.getenv("WITNESS_SEARCH_BOUND", "20000")),
            max_repair_rounds=int(os.getenv("MAX_REPAIR_ROUNDS", "12")),
            log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
            dot_rankdir=os.getenv("DOT_RANKDIR", "LR"),
        )

config = Config.from_env()
