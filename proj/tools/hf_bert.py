#!/usr/bin/env python3
# Copyright 2026 The ClaimLens Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Bridges claimlens encoder directories and Hugging Face BERT checkpoints.

  export  HF model (name or directory) -> claimlens dir
          (config.json, vocab.txt, weights.cltn)
  golden  claimlens dir -> CLS vectors computed by transformers.BertModel
          in float64, one value per line
"""

import argparse
import json
import os
import struct
import sys

import numpy as np


def read_cltn(path):
  with open(path, "rb") as f:
    data = f.read()
  if data[:4] != b"CLTN":
    sys.exit(f"{path}: not a tensor bundle")
  version, count = struct.unpack_from("<II", data, 4)
  if version != 1:
    sys.exit(f"{path}: unsupported version {version}")
  pos = 12
  tensors = {}
  for _ in range(count):
    (name_len,) = struct.unpack_from("<I", data, pos)
    pos += 4
    name = data[pos:pos + name_len].decode("utf-8")
    pos += name_len
    dtype, rows, cols = struct.unpack_from("<BQQ", data, pos)
    pos += 17
    np_type = "<f8" if dtype == 0 else "<f4"
    size = rows * cols * np.dtype(np_type).itemsize
    arr = np.frombuffer(data, dtype=np_type, count=rows * cols, offset=pos)
    tensors[name] = arr.reshape(rows, cols).astype(np.float64)
    pos += size
  return tensors


def write_cltn(path, tensors):
  with open(path, "wb") as f:
    f.write(b"CLTN")
    f.write(struct.pack("<II", 1, len(tensors)))
    for name in sorted(tensors):
      arr = np.asarray(tensors[name], dtype="<f8")
      if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
      encoded = name.encode("utf-8")
      f.write(struct.pack("<I", len(encoded)))
      f.write(encoded)
      f.write(struct.pack("<BQQ", 0, arr.shape[0], arr.shape[1]))
      f.write(np.ascontiguousarray(arr).tobytes())


def export(args):
  from transformers import AutoTokenizer, BertModel
  model = BertModel.from_pretrained(args.model, add_pooling_layer=False)
  tokenizer = AutoTokenizer.from_pretrained(args.model)
  os.makedirs(args.out, exist_ok=True)
  tensors = {}
  for name, value in model.state_dict().items():
    if name.endswith("position_ids") or name.startswith("pooler."):
      continue
    tensors[name] = value.detach().double().numpy()
  write_cltn(os.path.join(args.out, "weights.cltn"), tensors)
  cfg = model.config
  config = {
      "model_type": "bert",
      "vocab_size": cfg.vocab_size,
      "hidden_size": cfg.hidden_size,
      "num_hidden_layers": cfg.num_hidden_layers,
      "num_attention_heads": cfg.num_attention_heads,
      "intermediate_size": cfg.intermediate_size,
      "max_position_embeddings": cfg.max_position_embeddings,
      "type_vocab_size": cfg.type_vocab_size,
      "layer_norm_eps": cfg.layer_norm_eps,
      "hidden_act": cfg.hidden_act,
      "max_tokens": args.max_tokens,
  }
  with open(os.path.join(args.out, "config.json"), "w") as f:
    json.dump(config, f, indent=2)
    f.write("\n")
  vocab = sorted(tokenizer.get_vocab().items(), key=lambda kv: kv[1])
  with open(os.path.join(args.out, "vocab.txt"), "w", encoding="utf-8") as f:
    for token, _ in vocab:
      f.write(token + "\n")


def golden(args):
  import torch
  from transformers import BertConfig, BertModel
  with open(os.path.join(args.encoder, "config.json")) as f:
    cfg = json.load(f)
  config = BertConfig(
      vocab_size=cfg["vocab_size"],
      hidden_size=cfg["hidden_size"],
      num_hidden_layers=cfg["num_hidden_layers"],
      num_attention_heads=cfg["num_attention_heads"],
      intermediate_size=cfg["intermediate_size"],
      max_position_embeddings=cfg["max_position_embeddings"],
      type_vocab_size=cfg["type_vocab_size"],
      layer_norm_eps=cfg["layer_norm_eps"],
      hidden_act=cfg["hidden_act"],
      hidden_dropout_prob=0.0,
      attention_probs_dropout_prob=0.0)
  model = BertModel(config, add_pooling_layer=False).double().eval()
  tensors = read_cltn(os.path.join(args.encoder, "weights.cltn"))
  state = {}
  for name, param in model.state_dict().items():
    if name.endswith("position_ids"):
      state[name] = param
      continue
    arr = tensors[name]
    state[name] = torch.from_numpy(arr.reshape(tuple(param.shape)).copy())
  model.load_state_dict(state)
  with open(os.path.join(args.encoder, "vocab.txt"), encoding="utf-8") as f:
    vocab = [line.rstrip("\n") for line in f]
  ids = [vocab.index(p) for p in args.pieces.split()]
  with torch.no_grad():
    out = model(input_ids=torch.tensor([ids]),
                token_type_ids=torch.zeros(1, len(ids), dtype=torch.long),
                attention_mask=torch.ones(1, len(ids), dtype=torch.long))
  cls = out.last_hidden_state[0, 0].numpy()
  with open(args.out, "w") as f:
    for x in cls:
      f.write(repr(float(x)) + "\n")


def main():
  parser = argparse.ArgumentParser(description=__doc__,
                                   formatter_class=argparse.RawTextHelpFormatter)
  sub = parser.add_subparsers(dest="command", required=True)
  p = sub.add_parser("export")
  p.add_argument("model", help="HF model name or directory, e.g. bert-base-uncased")
  p.add_argument("out")
  p.add_argument("--max-tokens", type=int, default=128)
  p.set_defaults(func=export)
  p = sub.add_parser("golden")
  p.add_argument("encoder", help="claimlens encoder directory")
  p.add_argument("--pieces", default="[CLS] a [SEP]",
                 help="space-separated word pieces")
  p.add_argument("out")
  p.set_defaults(func=golden)
  args = parser.parse_args()
  args.func(args)


if __name__ == "__main__":
  main()
