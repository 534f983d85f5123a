"""Reference LSTM forecaster: data pipeline and the trainable model."""

from .data import (
    DatasetError,
    ScalerState,
    WeatherDataset,
    fit_scaler,
    inverse_transform,
    inverse_transform_columns,
    load_weather_csv,
    make_sine_dataset,
    make_windows,
    split_train_test,
    transform,
    write_dataset_csv,
)
from .model import (
    ForecastConfig,
    LstmModel,
    TrainingDiverged,
    backward_batch,
    forward_batch,
    init_params,
    load_model,
    lstm_forward,
    predict,
    save_model,
    train,
    train_and_predict,
)

__all__ = [
    "DatasetError",
    "ScalerState",
    "WeatherDataset",
    "fit_scaler",
    "inverse_transform",
    "inverse_transform_columns",
    "load_weather_csv",
    "make_sine_dataset",
    "make_windows",
    "split_train_test",
    "transform",
    "write_dataset_csv",
    "ForecastConfig",
    "LstmModel",
    "TrainingDiverged",
    "backward_batch",
    "forward_batch",
    "init_params",
    "load_model",
    "lstm_forward",
    "predict",
    "save_model",
    "train",
    "train_and_predict",
]
