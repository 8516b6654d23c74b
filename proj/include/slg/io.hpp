#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slg/bench.hpp"
#include "slg/gibbs.hpp"
#include "slg/graph.hpp"
#include "slg/synth.hpp"

namespace slg {

// Graph files: dense form (a '#' comment line, the vertex count, then n
// comma/space-separated rows) or triplet form ("i j w" per line, 1-indexed).
// Auto-detected by the first data line's token count.
WeightedGraph read_graph_csv(const std::filesystem::path& path);
void write_graph_csv(const std::filesystem::path& path, const WeightedGraph& g);

// Every *.csv in the directory, lexicographic filename order.
std::vector<WeightedGraph> read_graph_dir(const std::filesystem::path& dir);

// Shortest exact decimal for CSV cells.
std::string csv_num(double x);

// `# slg-csv v1 <table>` line, then the header row, then data rows.
void write_csv(const std::filesystem::path& path, const std::string& table,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRow>& rows);

// Versioned structured-text artifacts with an FNV-1a trailer; numbers stored
// as hexfloat so reload is bit-exact.
void save_samples(const std::filesystem::path& path,
                  const PosteriorSamples& samples);
PosteriorSamples load_samples(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// graph_<s>.csv per graph plus truth_labels.txt and manifest.txt.
void write_dataset(const std::filesystem::path& dir, const LabeledDataset& ds);

}  // namespace slg
