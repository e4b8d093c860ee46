from .layers import Layer, Dense, Conv1d, MaxPool1d, Elu, Sigmoid, Relu, Flatten, kaiming_uniform
from .architecture import LayerKind, LayerSpec, OutputHead, ModelSpec, INPUT_DIM
from .network import Network, Model, build_layer, mse_loss, targets_for_head, raw_to_alpha, predict
from .optim import AdamState, Adam, adam_step
from .trainer import TrainConfig, Trainer, TrainingCurve, EpochReport, train_default_config, evaluate_loss, train
from .serialization import save_model, load_model, dumps_model, loads_model, MAGIC
