from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    artifact_root: str = Field(default="artifacts")
    schema_conf: str = Field(default="config/schema.json")
    run_conf: str = Field(default="config/run.json")
    log_level: str = Field(default="INFO")

config = Config()
