#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmo/storage.hpp"
#include "hmo/tier_store.hpp"

namespace hmo {

struct RecoveryReport {
  bool from_snapshot = false;
  std::uint64_t snapshot_epoch = 0;
  std::size_t rows_restored = 0;  // covered by the snapshot
  std::size_t rows_replayed = 0;  // re-ingested after it
  std::size_t corrupt_lines = 0;
  std::size_t orphan_rows = 0;
  std::size_t orphan_embedding_rows = 0;
  std::optional<RecordId> last_written_id;  // includes orphaned lines
  std::vector<std::string> warnings;
};

/// Rebuilds `store` (which must be empty) from the archive and the latest
/// snapshot. Throws kConfigMismatch if the snapshot was taken under another
/// configuration.
RecoveryReport recover(TierStore& store, const StorePaths& paths);

}  // namespace hmo
