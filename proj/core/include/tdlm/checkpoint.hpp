#ifndef TDLM_CHECKPOINT_HPP_
#define TDLM_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "tdlm/model.hpp"
#include "tdlm/trainer.hpp"

TDLM_NAMESPACE_BEGIN

class CheckpointError : public IoError {
 public:
  using IoError::IoError;
};
class BadMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class VersionMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class TruncatedCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class ShapeMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TdlmModel model;
  TrainState state;
};

// Layout: the 5 bytes "TDLM1", a little-endian u64 header length, a UTF-8
// JSON header (config, vocabulary, tables, tensor directory, optimizer and
// training state), then the raw little-endian tensor payload.
std::string encode_checkpoint(const TdlmModel& model, const TrainState& state);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const TdlmModel& model, const TrainState& state);
Checkpoint load_checkpoint(const std::filesystem::path& path);

TDLM_NAMESPACE_END

#endif  // TDLM_CHECKPOINT_HPP_
