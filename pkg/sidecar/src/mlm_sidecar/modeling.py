"""Model bundle: tokenizer + masked LM, prediction, and light fine-tuning."""

from __future__ import annotations

import copy
import hashlib
import random
from dataclasses import dataclass
from typing import Sequence

import torch

from . import masking
from .config import Settings

CONTINUATION_MARKER = "##"


@dataclass
class TunedModel:
    model: "torch.nn.Module"
    echo: dict


class ModelBundle:
    """Owns the tokenizer and the immutable base model."""

    def __init__(self, tokenizer, model, settings: Settings, identity: str | None = None):
        if not getattr(tokenizer, "is_fast", False):
            raise ValueError("a fast tokenizer is required (word alignment needed)")
        self.tokenizer = tokenizer
        self.settings = settings
        self.device = torch.device(settings.device)
        self.model = model.to(self.device)
        self.model.eval()
        self.identity = identity or f"{settings.model_name}@{self._weights_digest()}"
        self.special_ids = set(tokenizer.all_special_ids)
        filler_id = tokenizer.convert_tokens_to_ids(".")
        if filler_id is None or filler_id == tokenizer.unk_token_id:
            filler_id = tokenizer.sep_token_id
        self.specials = {
            "mask": tokenizer.mask_token_id,
            "sep": tokenizer.sep_token_id,
            "filler": filler_id,
        }

    def _weights_digest(self) -> str:
        digest = hashlib.blake2b(digest_size=6)
        for name, tensor in sorted(self.model.state_dict().items()):
            digest.update(name.encode())
            digest.update(str(tuple(tensor.shape)).encode())
        return digest.hexdigest()

    @classmethod
    def load(cls, settings: Settings) -> "ModelBundle":
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(settings.model_name, use_fast=True)
        model = AutoModelForMaskedLM.from_pretrained(settings.model_name)
        return cls(tokenizer, model, settings, identity=settings.model_name)

    # -- tokenize ------------------------------------------------------------

    def tokenize_text(self, text: str) -> list[dict]:
        """Wordpiece tokens with Normal/Lead/Follow kinds and stripped markers."""
        if not text.strip():
            return []
        encoding = self.tokenizer(text, add_special_tokens=False)
        token_ids = encoding["input_ids"]
        pieces = self.tokenizer.convert_ids_to_tokens(token_ids)
        word_ids = encoding.word_ids()
        out: list[dict] = []
        for index, (piece, vocab_id) in enumerate(zip(pieces, token_ids)):
            word = word_ids[index]
            starts_word = index == 0 or word_ids[index - 1] != word or word is None
            continues = (
                index + 1 < len(pieces) and word is not None and word_ids[index + 1] == word
            )
            if starts_word and not continues:
                kind = "normal"
            elif starts_word:
                kind = "lead"
            else:
                kind = "follow"
            surface = piece
            if surface.startswith(CONTINUATION_MARKER) and len(surface) > 2:
                surface = surface[len(CONTINUATION_MARKER):]
            out.append(
                {
                    "surface": surface,
                    "char_len": max(1, len(surface)),
                    "kind": kind,
                    "vocab_id": int(vocab_id),
                }
            )
        return out

    # -- predict ---------------------------------------------------------------

    def predict(
        self, instances: Sequence[dict], model: "torch.nn.Module | None" = None
    ) -> list[list[int]]:
        """Argmax-over-vocabulary prediction per masked position.

        Inputs are wrapped [CLS] ... [SEP] internally; wire positions stay
        relative to the raw input_ids.
        """
        net = model if model is not None else self.model
        predictions: list[list[int]] = []
        chunk = max(1, self.settings.max_batch)
        for start in range(0, len(instances), chunk):
            batch = instances[start:start + chunk]
            if not batch:
                continue
            predictions.extend(self._predict_chunk(batch, net))
        return predictions

    def _predict_chunk(self, batch, net) -> list[list[int]]:
        cls_id = self.tokenizer.cls_token_id
        sep_id = self.tokenizer.sep_token_id
        pad_id = self.tokenizer.pad_token_id or 0
        wrapped = [[cls_id, *inst["input_ids"], sep_id] for inst in batch]
        width = max(len(ids) for ids in wrapped)
        input_ids = torch.full((len(wrapped), width), pad_id, dtype=torch.long)
        attention = torch.zeros((len(wrapped), width), dtype=torch.long)
        for row, ids in enumerate(wrapped):
            input_ids[row, :len(ids)] = torch.tensor(ids, dtype=torch.long)
            attention[row, :len(ids)] = 1
        with torch.no_grad():
            logits = net(
                input_ids=input_ids.to(self.device),
                attention_mask=attention.to(self.device),
            ).logits
        out: list[list[int]] = []
        for row, inst in enumerate(batch):
            positions = [p + 1 for p in inst["masked_positions"]]  # CLS shift
            if positions:
                out.append(logits[row, positions].argmax(dim=-1).tolist())
            else:
                out.append([])
        return out

    # -- tune --------------------------------------------------------------

    def _tuning_copies(self, summary_sentences: Sequence[Sequence[dict]],
                       tuning: dict) -> list[tuple[list[int], list[int]]]:
        """(input_ids, labels) pairs, one per pass with masked positions."""
        rng = random.Random(tuning["seed"] + 0x5EED)
        mask_id = self.specials["mask"]
        vocab_size = self.tokenizer.vocab_size
        copies: list[tuple[list[int], list[int]]] = []
        for sentence in summary_sentences:
            ids = [tok["vocab_id"] for tok in sentence]
            passes = masking.schedule_passes(sentence, tuning)
            actions = masking.corruption_actions(passes, tuning)
            for masked, pass_actions in zip(passes, actions):
                if not masked:
                    continue
                corrupted = list(ids)
                labels = [-100] * len(ids)
                for position in masked:
                    labels[position] = ids[position]
                    action = pass_actions[position]
                    if action == masking.MASK:
                        corrupted[position] = mask_id
                    elif action == masking.REPLACE:
                        corrupted[position] = masking.random_token_id(
                            rng, vocab_size, self.special_ids
                        )
                copies.append((corrupted, labels))
        return copies

    def fine_tune(
        self,
        summary_sentences: Sequence[Sequence[dict]],
        tuning: dict,
        epochs: int,
        learning_rate: float,
    ) -> TunedModel:
        """Clone the base weights and run masked-LM steps on summary copies.

        The base model is never touched; an empty summary yields a clone that
        is behaviorally identical to the base.
        """
        if self.settings.deterministic:
            torch.manual_seed(tuning["seed"])
        clone = copy.deepcopy(self.model)
        copies = self._tuning_copies(summary_sentences, tuning)
        echo = {
            "tuning_params": dict(tuning),
            "epochs": epochs,
            "learning_rate": learning_rate,
            "n_copies": len(copies),
        }
        if not copies:
            clone.eval()
            return TunedModel(model=clone, echo=echo)

        cls_id = self.tokenizer.cls_token_id
        sep_id = self.tokenizer.sep_token_id
        pad_id = self.tokenizer.pad_token_id or 0
        wrapped_ids = [[cls_id, *ids, sep_id] for ids, _ in copies]
        wrapped_labels = [[-100, *labels, -100] for _, labels in copies]
        width = max(len(ids) for ids in wrapped_ids)
        input_ids = torch.full((len(copies), width), pad_id, dtype=torch.long)
        labels = torch.full((len(copies), width), -100, dtype=torch.long)
        attention = torch.zeros((len(copies), width), dtype=torch.long)
        for row, (ids, labs) in enumerate(zip(wrapped_ids, wrapped_labels)):
            input_ids[row, :len(ids)] = torch.tensor(ids, dtype=torch.long)
            labels[row, :len(labs)] = torch.tensor(labs, dtype=torch.long)
            attention[row, :len(ids)] = 1
        input_ids = input_ids.to(self.device)
        labels = labels.to(self.device)
        attention = attention.to(self.device)

        clone.train()
        optimizer = torch.optim.AdamW(clone.parameters(), lr=learning_rate)
        for _ in range(max(1, epochs)):
            optimizer.zero_grad()
            loss = clone(
                input_ids=input_ids, attention_mask=attention, labels=labels
            ).loss
            loss.backward()
            optimizer.step()
        clone.eval()
        return TunedModel(model=clone, echo=echo)
