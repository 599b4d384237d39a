// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0
//
// Generates the synthetic desk-scale review corpus: templated sentences with
// per-document topics, controllable sentence-level repetition, one document
// per line.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chorus/rng.hpp"

namespace {

struct Topic {
  std::vector<std::string> nouns;
  std::vector<std::string> adjectives;
  std::vector<std::string> verbs;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {{"room", "bed", "bathroom", "window", "balcony", "suite"},
       {"clean", "dirty", "spacious", "cramped", "bright", "quiet"},
       {"booked", "loved", "cleaned", "admired"}},
      {{"breakfast", "coffee", "buffet", "pastry", "omelette", "juice"},
       {"fresh", "stale", "warm", "cold", "tasty", "bland"},
       {"enjoyed", "ordered", "skipped", "tried"}},
      {{"pool", "deck", "towel", "lounger", "slide", "jacuzzi"},
       {"heated", "freezing", "crowded", "empty", "sparkling", "murky"},
       {"swam", "visited", "avoided", "shared"}},
      {{"staff", "manager", "porter", "waiter", "receptionist", "concierge"},
       {"friendly", "rude", "helpful", "useless", "cheerful", "grumpy"},
       {"thanked", "asked", "called", "tipped"}},
      {{"beach", "shore", "sand", "wave", "umbrella", "boardwalk"},
       {"sunny", "windy", "golden", "rocky", "calm", "wild"},
       {"walked", "watched", "explored", "photographed"}},
      {{"garden", "terrace", "fountain", "hedge", "path", "bench"},
       {"lovely", "overgrown", "shady", "blooming", "tidy", "peaceful"},
       {"strolled", "rested", "painted", "discovered"}},
      {{"dinner", "menu", "steak", "salad", "dessert", "wine"},
       {"delicious", "overpriced", "rich", "simple", "spicy", "dry"},
       {"tasted", "recommended", "finished", "reviewed"}},
      {{"location", "street", "station", "market", "museum", "harbour"},
       {"central", "remote", "noisy", "charming", "historic", "busy"},
       {"reached", "found", "crossed", "toured"}},
  };
  return t;
}

std::string make_sentence(const Topic& topic, chorus::Rng& rng) {
  auto pick = [&](const std::vector<std::string>& v) {
    return v[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(v.size())))];
  };
  const std::string noun = pick(topic.nouns);
  const std::string adj = pick(topic.adjectives);
  const std::string verb = pick(topic.verbs);
  switch (rng.uniform_int(8)) {
    case 0:
      return "the " + noun + " was " + adj + " .";
    case 1:
      return "our " + noun + " was really " + adj + " .";
    case 2:
      return "we " + verb + " the " + adj + " " + noun + " .";
    case 3:
      return "i " + verb + " the " + noun + " again .";
    case 4:
      return "the " + noun + " looked " + adj + " and " +
             pick(topic.adjectives) + " .";
    case 5:
      return "it was a " + adj + " " + noun + " !";
    case 6:
      return "honestly the " + noun + " seemed " + adj + " to us .";
    default:
      return "we " + verb + " a " + adj + " " + noun + " there .";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpusgen: synthetic review corpus generator"};
  int docs = 500;
  std::uint64_t seed = 7;
  std::string out_path = "desk_reviews.txt";
  double repeat_prob = 0.04;
  int min_sentences = 10;
  int max_sentences = 13;
  app.add_option("--docs", docs, "number of documents");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out_path, "output file (one document per line)");
  app.add_option("--repeat-prob", repeat_prob,
                 "chance of repeating the previous sentence verbatim");
  app.add_option("--min-sentences", min_sentences, "sentences per doc, lower");
  app.add_option("--max-sentences", max_sentences, "sentences per doc, upper");
  CLI11_PARSE(app, argc, argv);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }

  chorus::Rng rng(seed);
  for (int d = 0; d < docs; ++d) {
    const Topic& main_topic = topics()[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(topics().size())))];
    const Topic& side_topic = topics()[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(topics().size())))];
    const int n = min_sentences +
                  rng.uniform_int(max_sentences - min_sentences + 1);
    std::string doc;
    std::string prev;
    for (int s = 0; s < n; ++s) {
      std::string sentence;
      if (!prev.empty() && rng.uniform() < repeat_prob) {
        sentence = prev;
      } else {
        const Topic& topic = rng.uniform() < 0.8 ? main_topic : side_topic;
        sentence = make_sentence(topic, rng);
      }
      if (!doc.empty()) doc += ' ';
      doc += sentence;
      prev = sentence;
    }
    out << doc << "\n";
  }
  std::cout << "wrote " << docs << " documents to " << out_path << "\n";
  return 0;
}
