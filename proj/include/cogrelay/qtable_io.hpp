#pragma once

#include <string>
#include <vector>

#include "cogrelay/rl.hpp"

namespace cogrelay {

/**
 * Trained-table artifact: the value matrix plus everything needed to reuse
 * it (quantization scheme, action mask, learning constants). Binary layout
 * is little-endian, format version 1; see the README for the field list.
 */
struct QTableArtifact {
  LevelScheme scheme;
  ActionMask mask;
  QTable table;
};

std::vector<unsigned char> serialize_qtable(const QTable& table,
                                            const LevelScheme& scheme,
                                            const ActionMask& mask);

QTableArtifact deserialize_qtable(const std::vector<unsigned char>& bytes);

void save_qtable(const std::string& path, const QTable& table,
                 const LevelScheme& scheme, const ActionMask& mask);

QTableArtifact load_qtable(const std::string& path);

}  // namespace cogrelay
