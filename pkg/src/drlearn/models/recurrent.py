"""Recurrent and LSTM models with hand-derived backpropagation through time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import Scaler, SequenceSet, StateConfig, identity_scaler
from .adam import Adam, clip_global_norm
from .common import TrainConfig, check_finite_loss, glorot_uniform, minibatch_indices

RNN_ARRAYS_PER_LAYER = 3  # w_h, w_x, b
LSTM_ARRAYS_PER_LAYER = 12  # (w_h, w_x, b) for forget, input, output, candidate


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class RnnModel:
    """Stacked tanh recurrence with a scalar linear readout on the top layer."""

    kind = "rnn"

    w_h: list[np.ndarray]  # each (units, units)
    w_x: list[np.ndarray]  # each (units, fan_in)
    b: list[np.ndarray]  # each (units,)
    out_weight: np.ndarray  # (units_last,)
    out_bias: float
    feature_layout: tuple[str, ...]
    scaler: Scaler
    state_config: StateConfig

    def hidden_sizes(self) -> list[int]:
        return [w.shape[0] for w in self.w_h]

    def initial_state(self, batch: int) -> list[np.ndarray]:
        return [np.zeros((batch, w.shape[0])) for w in self.w_h]

    def step(
        self, x: np.ndarray, state: list[np.ndarray]
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """One time step for a (batch, features) input; returns (y, new state)."""
        layer_in = x
        new_state = []
        for w_h, w_x, b, h_prev in zip(self.w_h, self.w_x, self.b, state):
            h = np.tanh(h_prev @ w_h.T + layer_in @ w_x.T + b)
            new_state.append(h)
            layer_in = h
        return layer_in @ self.out_weight + self.out_bias, new_state

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Standardized predictions for (batch, steps, features) windows."""
        batch, steps, _ = inputs.shape
        state = self.initial_state(batch)
        outputs = np.empty((batch, steps))
        for t in range(steps):
            outputs[:, t], state = self.step(inputs[:, t], state)
        return outputs


@dataclass
class LstmModel:
    """Stacked LSTM with one weight matrix pair and bias per gate per layer."""

    kind = "lstm"

    w_fh: list[np.ndarray]
    w_fx: list[np.ndarray]
    b_f: list[np.ndarray]
    w_ih: list[np.ndarray]
    w_ix: list[np.ndarray]
    b_i: list[np.ndarray]
    w_oh: list[np.ndarray]
    w_ox: list[np.ndarray]
    b_o: list[np.ndarray]
    w_ch: list[np.ndarray]
    w_cx: list[np.ndarray]
    b_c: list[np.ndarray]
    out_weight: np.ndarray
    out_bias: float
    feature_layout: tuple[str, ...]
    scaler: Scaler
    state_config: StateConfig

    def hidden_sizes(self) -> list[int]:
        return [w.shape[0] for w in self.w_fh]

    def initial_state(self, batch: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per layer (hidden, cell), both zero."""
        return [
            (np.zeros((batch, w.shape[0])), np.zeros((batch, w.shape[0])))
            for w in self.w_fh
        ]

    def step(
        self, x: np.ndarray, state: list[tuple[np.ndarray, np.ndarray]]
    ) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
        layer_in = x
        new_state = []
        for l, (h_prev, c_prev) in enumerate(state):
            f = sigmoid(h_prev @ self.w_fh[l].T + layer_in @ self.w_fx[l].T + self.b_f[l])
            i = sigmoid(h_prev @ self.w_ih[l].T + layer_in @ self.w_ix[l].T + self.b_i[l])
            o = sigmoid(h_prev @ self.w_oh[l].T + layer_in @ self.w_ox[l].T + self.b_o[l])
            cand = np.tanh(
                h_prev @ self.w_ch[l].T + layer_in @ self.w_cx[l].T + self.b_c[l]
            )
            c = f * c_prev + i * cand
            h = o * np.tanh(c)
            new_state.append((h, c))
            layer_in = h
        return layer_in @ self.out_weight + self.out_bias, new_state

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        batch, steps, _ = inputs.shape
        state = self.initial_state(batch)
        outputs = np.empty((batch, steps))
        for t in range(steps):
            outputs[:, t], state = self.step(inputs[:, t], state)
        return outputs


def _window_forward(model: RnnModel | LstmModel, window: np.ndarray) -> np.ndarray:
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != len(model.feature_layout):
        raise ValueError(
            f"expected (steps, {len(model.feature_layout)}) inputs, got shape"
            f" {window.shape}"
        )
    if window.shape[0] == 0:
        raise ValueError("window must contain at least one step")
    x = model.scaler.transform_inputs(window)
    y = model.forward(x[None, :, :])
    return model.scaler.inverse_targets(y[0])


def rnn_forward(model: RnnModel, window: np.ndarray) -> np.ndarray:
    """MWh predictions for one raw feature window, zero initial state."""
    return _window_forward(model, window)


def lstm_forward(model: LstmModel, window: np.ndarray) -> np.ndarray:
    """MWh predictions for one raw feature window, zero initial states."""
    return _window_forward(model, window)


def init_rnn_params(
    n_features: int, hidden_sizes: list[int], rng: np.random.Generator
) -> list[np.ndarray]:
    """[w_h, w_x, b] per layer, then output weight and bias."""
    params: list[np.ndarray] = []
    fan_in = n_features
    for units in hidden_sizes:
        params.append(glorot_uniform(rng, units, units))
        params.append(glorot_uniform(rng, units, fan_in))
        params.append(np.zeros(units))
        fan_in = units
    params.append(glorot_uniform(rng, 1, fan_in)[0])
    params.append(np.zeros(()))
    return params


def init_lstm_params(
    n_features: int, hidden_sizes: list[int], rng: np.random.Generator
) -> list[np.ndarray]:
    """Gate blocks in forget, input, output, candidate order per layer.

    Forget biases start at 1 so early training does not flush the cell state.
    """
    params: list[np.ndarray] = []
    fan_in = n_features
    for units in hidden_sizes:
        for gate in range(4):
            params.append(glorot_uniform(rng, units, units))
            params.append(glorot_uniform(rng, units, fan_in))
            params.append(np.full(units, 1.0) if gate == 0 else np.zeros(units))
        fan_in = units
    params.append(glorot_uniform(rng, 1, fan_in)[0])
    params.append(np.zeros(()))
    return params


def rnn_loss_and_grads(
    params: list[np.ndarray], inputs: np.ndarray, targets: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """MSE over every step of every window, gradients by full BPTT."""
    n_layers = (len(params) - 2) // RNN_ARRAYS_PER_LAYER
    w_h = [params[3 * l] for l in range(n_layers)]
    w_x = [params[3 * l + 1] for l in range(n_layers)]
    b = [params[3 * l + 2] for l in range(n_layers)]
    w_out, b_out = params[-2], params[-1]

    batch, steps, _ = inputs.shape
    # hidden[l] has steps+1 slots; slot 0 is the zero initial state
    hidden = []
    layer_in = inputs
    for l in range(n_layers):
        units = w_h[l].shape[0]
        h = np.zeros((batch, steps + 1, units))
        for t in range(steps):
            h[:, t + 1] = np.tanh(h[:, t] @ w_h[l].T + layer_in[:, t] @ w_x[l].T + b[l])
        hidden.append(h)
        layer_in = h[:, 1:]
    outputs = layer_in @ w_out + b_out

    m = batch * steps
    residual = outputs - targets
    loss = float(np.sum(residual**2) / m)
    d_out = 2.0 * residual / m

    g_wh = [np.zeros_like(w) for w in w_h]
    g_wx = [np.zeros_like(w) for w in w_x]
    g_b = [np.zeros_like(v) for v in b]
    g_w_out = np.einsum("btu,bt->u", hidden[-1][:, 1:], d_out)
    g_b_out = np.asarray(d_out.sum())

    d_time = [np.zeros((batch, w.shape[0])) for w in w_h]
    for t in range(steps - 1, -1, -1):
        d_above = d_out[:, t, None] * w_out
        for l in range(n_layers - 1, -1, -1):
            h_t = hidden[l][:, t + 1]
            dz = (d_above + d_time[l]) * (1.0 - h_t**2)
            below = inputs[:, t] if l == 0 else hidden[l - 1][:, t + 1]
            g_wh[l] += dz.T @ hidden[l][:, t]
            g_wx[l] += dz.T @ below
            g_b[l] += dz.sum(axis=0)
            d_time[l] = dz @ w_h[l]
            d_above = dz @ w_x[l]

    grads: list[np.ndarray] = []
    for l in range(n_layers):
        grads.extend([g_wh[l], g_wx[l], g_b[l]])
    grads.extend([g_w_out, g_b_out])
    return loss, grads


def lstm_loss_and_grads(
    params: list[np.ndarray], inputs: np.ndarray, targets: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """MSE over every step of every window, gradients by full BPTT."""
    n_layers = (len(params) - 2) // LSTM_ARRAYS_PER_LAYER
    per = [params[12 * l : 12 * (l + 1)] for l in range(n_layers)]
    w_out, b_out = params[-2], params[-1]

    batch, steps, _ = inputs.shape
    hidden, cell = [], []  # steps+1 slots, slot 0 zero
    gate_f, gate_i, gate_o, cand = [], [], [], []  # steps slots
    layer_in = inputs
    for l in range(n_layers):
        w_fh, w_fx, b_f, w_ih, w_ix, b_i, w_oh, w_ox, b_o, w_ch, w_cx, b_c = per[l]
        units = w_fh.shape[0]
        h = np.zeros((batch, steps + 1, units))
        c = np.zeros((batch, steps + 1, units))
        f = np.empty((batch, steps, units))
        i = np.empty((batch, steps, units))
        o = np.empty((batch, steps, units))
        cd = np.empty((batch, steps, units))
        for t in range(steps):
            h_prev, x_t = h[:, t], layer_in[:, t]
            f[:, t] = sigmoid(h_prev @ w_fh.T + x_t @ w_fx.T + b_f)
            i[:, t] = sigmoid(h_prev @ w_ih.T + x_t @ w_ix.T + b_i)
            o[:, t] = sigmoid(h_prev @ w_oh.T + x_t @ w_ox.T + b_o)
            cd[:, t] = np.tanh(h_prev @ w_ch.T + x_t @ w_cx.T + b_c)
            c[:, t + 1] = f[:, t] * c[:, t] + i[:, t] * cd[:, t]
            h[:, t + 1] = o[:, t] * np.tanh(c[:, t + 1])
        hidden.append(h)
        cell.append(c)
        gate_f.append(f)
        gate_i.append(i)
        gate_o.append(o)
        cand.append(cd)
        layer_in = h[:, 1:]
    outputs = layer_in @ w_out + b_out

    m = batch * steps
    residual = outputs - targets
    loss = float(np.sum(residual**2) / m)
    d_out = 2.0 * residual / m

    g_per = [[np.zeros_like(a) for a in layer] for layer in per]
    g_w_out = np.einsum("btu,bt->u", hidden[-1][:, 1:], d_out)
    g_b_out = np.asarray(d_out.sum())

    d_time_h = [np.zeros((batch, layer[0].shape[0])) for layer in per]
    d_time_c = [np.zeros((batch, layer[0].shape[0])) for layer in per]
    for t in range(steps - 1, -1, -1):
        d_above = d_out[:, t, None] * w_out
        for l in range(n_layers - 1, -1, -1):
            w_fh, w_fx, _, w_ih, w_ix, _, w_oh, w_ox, _, w_ch, w_cx, _ = per[l]
            f, i, o, cd = gate_f[l][:, t], gate_i[l][:, t], gate_o[l][:, t], cand[l][:, t]
            tan_c = np.tanh(cell[l][:, t + 1])
            dh = d_above + d_time_h[l]
            do = dh * tan_c
            dc = d_time_c[l] + dh * o * (1.0 - tan_c**2)
            df = dc * cell[l][:, t]
            di = dc * cd
            dcd = dc * i
            d_time_c[l] = dc * f
            dz_f = df * f * (1.0 - f)
            dz_i = di * i * (1.0 - i)
            dz_o = do * o * (1.0 - o)
            dz_c = dcd * (1.0 - cd**2)
            h_prev = hidden[l][:, t]
            below = inputs[:, t] if l == 0 else hidden[l - 1][:, t + 1]
            for k, dz in enumerate((dz_f, dz_i, dz_o, dz_c)):
                g_per[l][3 * k] += dz.T @ h_prev
                g_per[l][3 * k + 1] += dz.T @ below
                g_per[l][3 * k + 2] += dz.sum(axis=0)
            d_time_h[l] = dz_f @ w_fh + dz_i @ w_ih + dz_o @ w_oh + dz_c @ w_ch
            d_above = dz_f @ w_fx + dz_i @ w_ix + dz_o @ w_ox + dz_c @ w_cx

    grads: list[np.ndarray] = []
    for layer in g_per:
        grads.extend(layer)
    grads.extend([g_w_out, g_b_out])
    return loss, grads


def train_recurrent(
    dataset: SequenceSet,
    kind: str,
    hidden_sizes: list[int],
    cfg: TrainConfig,
    scaler: Scaler | None = None,
    state_config: StateConfig | None = None,
) -> tuple[RnnModel | LstmModel, np.ndarray]:
    """Adam over minibatches of windows with global-norm gradient clipping."""
    if kind not in ("rnn", "lstm"):
        raise ValueError(f"unknown recurrent kind {kind!r}")
    inputs = np.asarray(dataset.inputs, dtype=float)
    targets = np.asarray(dataset.targets, dtype=float)
    if inputs.ndim != 3 or len(inputs) < 1:
        raise ValueError("need at least one (steps, features) window")
    n_features = inputs.shape[2]

    rng = np.random.default_rng(cfg.rng_seed)
    if kind == "rnn":
        params = init_rnn_params(n_features, hidden_sizes, rng)
        loss_and_grads = rnn_loss_and_grads
    else:
        params = init_lstm_params(n_features, hidden_sizes, rng)
        loss_and_grads = lstm_loss_and_grads
    optimizer = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    losses = np.empty(cfg.steps)
    for step, idx in enumerate(
        minibatch_indices(rng, len(inputs), cfg.batch_size, cfg.steps)
    ):
        loss, grads = loss_and_grads(params, inputs[idx], targets[idx])
        check_finite_loss(loss, step)
        losses[step] = loss
        clip_global_norm(grads, cfg.gradient_clip_norm)
        optimizer.step(params, grads)

    if scaler is None:
        scaler = identity_scaler(n_features)
    if state_config is None:
        state_config = StateConfig(order=1, time_encoding="scalar")
    n_layers = len(hidden_sizes)
    if kind == "rnn":
        model: RnnModel | LstmModel = RnnModel(
            w_h=[params[3 * l] for l in range(n_layers)],
            w_x=[params[3 * l + 1] for l in range(n_layers)],
            b=[params[3 * l + 2] for l in range(n_layers)],
            out_weight=params[-2],
            out_bias=float(params[-1]),
            feature_layout=dataset.feature_layout,
            scaler=scaler,
            state_config=state_config,
        )
    else:
        per = [params[12 * l : 12 * (l + 1)] for l in range(n_layers)]
        model = LstmModel(
            w_fh=[p[0] for p in per],
            w_fx=[p[1] for p in per],
            b_f=[p[2] for p in per],
            w_ih=[p[3] for p in per],
            w_ix=[p[4] for p in per],
            b_i=[p[5] for p in per],
            w_oh=[p[6] for p in per],
            w_ox=[p[7] for p in per],
            b_o=[p[8] for p in per],
            w_ch=[p[9] for p in per],
            w_cx=[p[10] for p in per],
            b_c=[p[11] for p in per],
            out_weight=params[-2],
            out_bias=float(params[-1]),
            feature_layout=dataset.feature_layout,
            scaler=scaler,
            state_config=state_config,
        )
    return model, losses
