#ifndef WARPCONV_NN_CHECKPOINT_HPP
#define WARPCONV_NN_CHECKPOINT_HPP

#include <filesystem>
#include <stdexcept>

#include "warpconv/nn/network.hpp"

namespace warpconv::nn {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckpointInfo {
    std::uint32_t version = 0;
    std::uint64_t spec_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
    std::string spec;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout is documented in docs/checkpoint-format.md.
void save_checkpoint(const std::filesystem::path& path, Network& net, const AdamState& adam,
                     std::uint64_t iteration);

/// Restores parameters, buffers and optimizer state into a network built from
/// the same spec. Throws CheckpointError on any mismatch or truncation.
CheckpointInfo load_checkpoint(const std::filesystem::path& path, Network& net, AdamState& adam);

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

}  // namespace warpconv::nn

#endif
