#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cadseq/model.hpp"
#include "cadseq/rng.hpp"

namespace cadseq {

// JSON model schema (one model per file):
// {"pairs":[{"loops":[[{"t":"L","x":..,"y":..},
//                      {"t":"A","x":..,"y":..,"alpha":..,"f":0},
//                      {"t":"C","x":..,"y":..,"r":..}], ...],
//            "extrude":{"theta":..,"phi":..,"gamma":..,"px":..,"py":..,"pz":..,
//                       "s":..,"e1":..,"e2":..,"b":0,"u":0}}]}
std::string model_to_json(const CadModel& model);
CadModel model_from_json(const std::string& text);

struct Corpus {
    std::vector<std::pair<std::string, CadModel>> models;  // (id, model), ids unique
    std::string manifest_hash;

    std::size_t size() const { return models.size(); }
};

// Reads every *.json model in a directory (sorted by filename) and writes /
// verifies manifest.json with a content hash.
Corpus load_corpus(const std::string& dir);
void save_corpus(const Corpus& corpus, const std::string& dir);

struct CorpusSplit {
    std::vector<std::size_t> train, val, test;  // indices into the corpus
};

// Seeded shuffle then 90/5/5; floor for val/test, remainder to train.
CorpusSplit split_corpus(const Corpus& corpus, uint64_t seed);

// With probability 1/2 swaps k >= 1 sketch-extrude pairs with a random other
// corpus model; single-pair models pass through untouched. The result is
// re-canonicalized and may be geometrically invalid (that is accepted).
CadModel augment_mix(const CadModel& model, Rng& rng, const Corpus& corpus);

// Random valid models (1..3 pairs; rectangle / circle / n-gon / rounded
// shapes), normalized and canonical; every output passes the solidity check.
Corpus synth_corpus(int n, uint64_t seed);

struct CorpusStats {
    std::map<int, int> length_histogram;           // non-EOS command count
    std::map<int, int> extrusion_count_histogram;  // pairs per model
    long line_count = 0;
    long arc_count = 0;
    long circle_count = 0;

    std::string to_json() const;
    std::string to_tsv() const;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace cadseq
