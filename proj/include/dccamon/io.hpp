#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/monitor.hpp"
#include "dccamon/neural.hpp"
#include "dccamon/simgen.hpp"

namespace dccamon {

/// A config file failed validation (maps to exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An upstream artifact is missing, truncated or fails its hash check
/// (maps to exit code 3).
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t value);

// --- tensor files: structured text header + little-endian f64 payload ---

void write_tensor(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::pair<std::string, std::string>>& meta = {});
Matrix read_tensor(const std::filesystem::path& path,
                   std::map<std::string, std::string>* meta = nullptr);
void write_tensor_stream(std::ostream& os, const Matrix& m,
                         const std::vector<std::pair<std::string, std::string>>& meta = {});
Matrix read_tensor_stream(std::istream& is, const std::string& what,
                          std::map<std::string, std::string>* meta = nullptr);

// --- network checkpoints: text header (widths, activation, version) + payload ---

void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

// --- binary portable bitmaps for quality images ---

void write_pbm(const std::filesystem::path& path, const std::uint8_t* pixels, int side);
std::vector<std::uint8_t> read_pbm(const std::filesystem::path& path, int& side);

/// Flat key = value configuration with [section] headers; keys are stored as
/// "section.key". Lookups raise ConfigError with file and line context.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_text(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;

    struct Entry {
        std::string key, value;
        int line = 0;
    };
    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& name() const { return name_; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

private:
    std::string name_;
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

/// Stable hash over sorted key=value lines.
std::string canonical_hash(std::vector<std::pair<std::string, std::string>> kv);

std::vector<std::pair<std::string, std::string>> sim_config_to_kv(const SimConfig& config);
SimConfig sim_config_from(const ConfigFile& file, const std::string& section = "sim");
std::string sim_config_hash(const SimConfig& config);

// --- dataset directory (signals tensor, pbm images + manifest, labels) ---

void write_dataset(const std::filesystem::path& dir, const SimDataset& dataset);
SimDataset read_dataset(const std::filesystem::path& dir);

// --- monitor model directory ---

void save_monitor_model(const std::filesystem::path& dir, const MonitorModel& model,
                        const std::string& dataset_hash);
struct StoredModel {
    MonitorModel model;
    std::string dataset_hash;
};
StoredModel load_monitor_model(const std::filesystem::path& dir);

}  // namespace dccamon
