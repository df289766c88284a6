#pragma once

#include <string>
#include <vector>

#include "cadseq/tensor.hpp"

namespace cadseq {

// Versioned binary container of named tensor blobs, shared by the
// autoencoder and the latent-GAN checkpoints.
struct NamedBlob {
    std::string name;
    Mat value;
};

void write_blobs(const std::string& path, const std::vector<NamedBlob>& blobs);
std::vector<NamedBlob> read_blobs(const std::string& path);
const Mat* find_blob(const std::vector<NamedBlob>& blobs, const std::string& name);

}  // namespace cadseq
