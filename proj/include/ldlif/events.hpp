#pragma once

// Binary spike-event files.
//
// LDLF (one spike train), little-endian:
//   char[4] "LDLF" | u32 version (=1) | u32 neuron_count | u32 timestep_count
//   then (u32 timestep, u32 neuron_id) pairs until end of file, sorted by
//   (timestep, neuron_id) with no duplicates.
//
// LDLS (labelled set of trains):
//   char[4] "LDLS" | u32 version (=1) | u32 sample_count
//   then per sample: u32 label | u64 byte_length | byte_length bytes of LDLF.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ldlif/neuron.hpp"
#include "ldlif/train.hpp"

namespace ldlif {

inline constexpr std::uint32_t kEventFileVersion = 1;
inline constexpr std::uint32_t kDatasetFileVersion = 1;

struct SpikeEvent {
    std::uint32_t timestep = 0;
    std::uint32_t neuron = 0;

    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
    friend auto operator<=>(const SpikeEvent&, const SpikeEvent&) = default;
};

struct SpikeEventFile {
    std::uint32_t version = kEventFileVersion;
    std::uint32_t neuron_count = 0;
    std::uint32_t timestep_count = 0;
    std::vector<SpikeEvent> events;

    /// Throws ValidationError naming the first out-of-order, duplicate or
    /// out-of-range event.
    void validate() const;
    SpikeTrain densify() const;
    static SpikeEventFile from_train(const SpikeTrain& train);
};

SpikeEventFile read_event_file(std::istream& is);
void write_event_file(std::ostream& os, const SpikeEventFile& f);

SpikeTrain load_events(const std::filesystem::path& path);
void save_events(const std::filesystem::path& path, const SpikeTrain& train);

Dataset read_dataset(std::istream& is);
void write_dataset(std::ostream& os, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

/// Human-readable header and event counts for either file kind.
void describe_event_file(std::ostream& out, const std::filesystem::path& path);

}  // namespace ldlif
