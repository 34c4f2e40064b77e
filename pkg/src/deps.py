from functools import lru_cache

from src.config import config, Config
from src.cwsplit import CombinatorialTransversality
from src.session import Session, load_session


def get_config() -> Config:
    return config


@lru_cache(maxsize=16)
def get_session(path: str) -> Session:
    return load_session(path)


@lru_cache(maxsize=16)
def get_transversality(path: str) -> CombinatorialTransversality:
    return CombinatorialTransversality(get_session(path).require_presentation())
