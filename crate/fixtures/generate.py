#!/usr/bin/env python3
"""Regenerates the bundled fixture corpus under fixtures/corpus/.

Each video is a bundle directory: meta.json, frames.jsonl, segments.json and
optionally laughter.json and audio.wav (16-bit mono PCM). Output is
deterministic; rerun after editing and commit the result.
"""

import json
import math
import random
import struct
import wave
from pathlib import Path

ROOT = Path(__file__).resolve().parent / "corpus"
FPS = 5.0
SAMPLE_RATE = 8000


def one(emotion, conf):
    return {emotion: conf}


def frames_for(spans, fps=FPS, jitter=None, undetected=()):
    """spans: list of (start, end, emotion, confidence)."""
    out = []
    for start, end, emotion, conf in spans:
        n = int(round((end - start) * fps))
        for k in range(n):
            t = round(start + k / fps, 3)
            if t in undetected:
                out.append({"t": t, "faceDetected": False})
                continue
            dist = {emotion: conf}
            if jitter is not None:
                dist = {emotion: round(conf - jitter.uniform(0, 0.2), 3)}
                other = jitter.choice(["neutral", "surprise", "contempt"])
                if other != emotion:
                    dist[other] = round(jitter.uniform(0.0, 0.1), 3)
            out.append({
                "t": t,
                "faceDetected": True,
                "box": {"x": 0.4, "y": 0.2, "w": 0.2, "h": 0.3},
                "emotions": dist,
            })
    return out


def words_for(text, start, end):
    tokens = text.split()
    slot = (end - start) / len(tokens)
    return [
        {"w": w, "start": round(start + i * slot + 0.02, 3), "end": round(start + (i + 1) * slot - 0.02, 3)}
        for i, w in enumerate(tokens)
    ]


def segment(i, start, end, text, text_emotion, audio_emotion):
    return {
        "id": i,
        "start": start,
        "end": end,
        "text": text,
        "words": words_for(text, start, end),
        "textEmotion": text_emotion,
        "audioEmotion": audio_emotion,
    }


def tone(seconds, pieces):
    """pieces: list of (start, end, freq, amp)."""
    n = int(seconds * SAMPLE_RATE)
    samples = [0.0] * n
    for start, end, freq, amp in pieces:
        for i in range(int(start * SAMPLE_RATE), min(n, int(end * SAMPLE_RATE))):
            samples[i] = amp * math.sin(2 * math.pi * freq * i / SAMPLE_RATE)
    return samples


def write(video_id, title, category, duration, frames, segments, laughter=None, audio=None):
    d = ROOT / video_id
    d.mkdir(parents=True, exist_ok=True)
    meta = {"id": video_id, "title": title, "category": category, "duration": duration, "frameRate": FPS}
    (d / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    (d / "frames.jsonl").write_text("".join(json.dumps(f) + "\n" for f in frames))
    (d / "segments.json").write_text(json.dumps(segments, indent=2) + "\n")
    if laughter is not None:
        (d / "laughter.json").write_text(json.dumps(laughter, indent=2) + "\n")
    if audio is not None:
        with wave.open(str(d / "audio.wav"), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(SAMPLE_RATE)
            w.writeframes(b"".join(struct.pack("<h", max(-32768, min(32767, round(s * 32768)))) for s in audio))


def coherent_talk():
    spans = [(0.0, 2.0, "happiness", 0.9), (2.0, 4.0, "happiness", 0.8), (4.0, 6.0, "neutral", 0.7)]
    segments = [
        segment(0, 0.0, 2.0, "I love this happy work", one("happiness", 0.9), one("happiness", 0.7)),
        segment(1, 2.0, 4.0, "joy comes from people", one("happiness", 0.8), one("happiness", 0.6)),
        segment(2, 4.0, 6.0, "so let us begin today", one("neutral", 0.6), one("neutral", 0.9)),
    ]
    audio = tone(6.0, [(0.0, 2.0, 220.0, 0.5), (2.0, 4.0, 330.0, 0.3), (4.0, 6.0, 150.0, 0.2)])
    write("coherent-talk", "Finding joy at work", "business", 6.0, frames_for(spans), segments, [], audio)


def mixed_talk():
    # Degrees 2, 0, 1 with a flicker and a sustained change inside segment 1.
    spans = [
        (0.0, 2.0, "happiness", 0.9),
        (2.0, 2.4, "sadness", 0.7),
        (2.4, 2.6, "anger", 0.8),
        (2.6, 4.0, "sadness", 0.7),
        (4.0, 6.0, "fear", 0.6),
    ]
    segments = [
        segment(0, 0.0, 2.0, "we are happy to be here", one("happiness", 0.8), one("happiness", 0.7)),
        segment(1, 2.0, 4.0, "change makes us afraid", one("fear", 0.9), one("anger", 0.6)),
        segment(2, 4.0, 6.0, "fear is a terrible guide", one("fear", 0.7), one("neutral", 0.5)),
    ]
    frames = frames_for(spans, undetected={4.4, 4.6})
    audio = tone(6.0, [(0.0, 6.0, 180.0, 0.4)])
    write("mixed-talk", "Why we fear change", "psychology", 6.0, frames, segments, [], audio)


def spam_talk():
    spans = [(0.0, 2.0, "neutral", 0.8), (2.0, 4.0, "surprise", 0.7), (4.0, 6.0, "happiness", 0.9)]
    segments = [
        segment(0, 0.0, 2.0, "the inbox is full of spam", one("neutral", 0.7), one("anger", 0.6)),
        segment(1, 2.0, 4.0, "nobody wants these messages", one("disgust", 0.8), one("contempt", 0.5)),
        segment(2, 4.0, 6.0, "and then we laughed", one("happiness", 0.9), one("happiness", 0.8)),
    ]
    # Laughter covers most of segment 2, so its audio emotion is masked.
    laughter = [{"start": 4.2, "end": 5.2}, {"start": 5.0, "end": 5.8}]
    write("spam-talk", "The truth about spam", "technology", 6.0, frames_for(spans), segments, laughter, None)


def single_sentence():
    spans = [(0.0, 3.0, "neutral", 0.8)]
    segments = [segment(0, 0.0, 3.0, "what a wonderful surprise", one("happiness", 0.9), one("neutral", 0.6))]
    write("single-sentence", "One sentence", "misc", 3.0, frames_for(spans), segments, [], None)


def cluster_talk():
    rng = random.Random(7)
    spans, segments = [], []
    happy = ["we love sharing good news", "this is a happy day", "great people make great work",
             "joy spreads fast", "thank you all so much"]
    sad = ["we lost so much that year", "grief is heavy", "it was a sad time",
           "nobody came back", "the silence hurt"]
    for i in range(20):
        start, end = float(2 * i), float(2 * i + 2)
        emotion = "happiness" if i % 2 == 0 else "sadness"
        text = (happy if emotion == "happiness" else sad)[(i // 2) % 5]
        conf_t = round(rng.uniform(0.6, 0.95), 3)
        conf_a = round(rng.uniform(0.5, 0.9), 3)
        spans.append((start, end, emotion, 0.95))
        segments.append(segment(i, start, end, text, one(emotion, conf_t), one(emotion, conf_a)))
    frames = frames_for(spans, jitter=rng)
    write("cluster-talk", "Two moods", "education", 40.0, frames, segments, [], None)


if __name__ == "__main__":
    coherent_talk()
    mixed_talk()
    spam_talk()
    single_sentence()
    cluster_talk()
