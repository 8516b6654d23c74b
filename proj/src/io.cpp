#include "slg/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

namespace slg {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

double to_double(const std::string& tok, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    fail(Errc::ParseError, std::string("bad ") + what + ": '" + tok + "'");
  return v;
}

long long to_ll(const std::string& tok, const char* what) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    fail(Errc::ParseError, std::string("bad ") + what + ": '" + tok + "'");
  return v;
}

std::uint64_t to_u64(const std::string& tok, const char* what) {
  char* end = nullptr;
  errno = 0;
  const std::uint64_t v = std::strtoull(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    fail(Errc::ParseError, std::string("bad ") + what + ": '" + tok + "'");
  return v;
}

std::string hexd(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class TokenReader {
 public:
  explicit TokenReader(const std::string& body) : is_(body) {}
  std::string next(const char* what) {
    std::string t;
    if (!(is_ >> t))
      fail(Errc::ParseError,
           std::string("artifact truncated while reading ") + what);
    return t;
  }
  void expect(const char* tag) {
    const std::string t = next(tag);
    if (t != tag)
      fail(Errc::ParseError,
           std::string("expected '") + tag + "', found '" + t + "'");
  }
  long long integer(const char* what) { return to_ll(next(what), what); }
  std::uint64_t u64(const char* what) { return to_u64(next(what), what); }
  double real(const char* what) { return to_double(next(what), what); }

 private:
  std::istringstream is_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for write");
  out << text;
  out.flush();
  if (!out) fail(Errc::IoError, "write failed on " + path.string());
}

std::string read_text(const fs::path& path, Errc missing_code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(missing_code, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---- checksummed artifact envelope ----------------------------------------

void write_blob(const fs::path& path, const std::string& body) {
  char trailer[32];
  std::snprintf(trailer, sizeof trailer, "%016llx",
                static_cast<unsigned long long>(fnv1a(body)));
  write_text(path, body + "checksum " + trailer + "\n");
}

std::string read_blob(const fs::path& path) {
  const std::string text = read_text(path, Errc::MissingFitArtifacts);
  const auto pos = text.rfind("checksum ");
  if (pos == std::string::npos || (pos != 0 && text[pos - 1] != '\n'))
    fail(Errc::ChecksumMismatch, "no checksum trailer in " + path.string());
  const std::string body = text.substr(0, pos);
  const auto toks = split_tokens(text.substr(pos));
  if (toks.size() != 2)
    fail(Errc::ChecksumMismatch, "malformed checksum trailer in " + path.string());
  char expect[32];
  std::snprintf(expect, sizeof expect, "%016llx",
                static_cast<unsigned long long>(fnv1a(body)));
  if (toks[1] != expect)
    fail(Errc::ChecksumMismatch, "checksum mismatch in " + path.string());
  return body;
}

// ---- state blocks ----------------------------------------------------------

void write_vector(std::ostream& os, const Vector& v) {
  os << v.size();
  for (int i = 0; i < v.size(); ++i) os << " " << hexd(v(i));
}

Vector read_vector(TokenReader& tr, const char* what) {
  const int n = static_cast<int>(tr.integer(what));
  if (n < 0) fail(Errc::ParseError, std::string("negative length for ") + what);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = tr.real(what);
  return v;
}

void write_graph_state(std::ostream& os, const GraphState& gs) {
  os << gs.z << " " << hexd(gs.theta) << " " << gs.lambda.size();
  for (int k = 0; k < gs.lambda.size(); ++k) os << " " << hexd(gs.lambda(k));
  for (int k = 0; k < gs.eta.size(); ++k) os << " " << gs.eta(k);
  os << " ";
  write_vector(os, gs.diagL);
  os << "\n";
}

GraphState read_graph_state(TokenReader& tr) {
  GraphState gs;
  gs.z = static_cast<int>(tr.integer("z"));
  gs.theta = tr.real("theta");
  const int T = static_cast<int>(tr.integer("T"));
  if (T < 1) fail(Errc::ParseError, "bad spike count in artifact");
  gs.lambda.resize(T);
  gs.eta.resize(T);
  for (int k = 0; k < T; ++k) gs.lambda(k) = tr.real("lambda");
  for (int k = 0; k < T; ++k) gs.eta(k) = static_cast<int>(tr.integer("eta"));
  gs.diagL = read_vector(tr, "diagL");
  return gs;
}

void write_matrix(std::ostream& os, const Matrix& M) {
  os << M.rows() << " " << M.cols();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) os << " " << hexd(M(i, j));
}

Matrix read_matrix(TokenReader& tr, const char* what) {
  const int r = static_cast<int>(tr.integer(what));
  const int c = static_cast<int>(tr.integer(what));
  if (r < 0 || c < 0) fail(Errc::ParseError, std::string("bad shape for ") + what);
  Matrix M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = tr.real(what);
  return M;
}

void write_samples_body(std::ostream& os, const PosteriorSamples& ps) {
  os << "config " << ps.iters << " " << ps.burnin << " " << ps.thin << " "
     << ps.seed << " " << ps.chain << "\n";
  os << "trace " << ps.trace.size() << "\n";
  for (const auto& tr : ps.trace)
    os << tr.sweep << " " << hexd(tr.log_joint) << " " << hexd(tr.sigma2_e)
       << " " << tr.occupied_atoms << "\n";
  os << "samples " << ps.samples.size() << "\n";
  for (const auto& smp : ps.samples) {
    os << "sample " << smp.sweep << " " << hexd(smp.log_joint) << " "
       << hexd(smp.sigma2_e) << " " << hexd(smp.w) << " "
       << hexd(smp.sigma2_theta) << " " << hexd(smp.sigma2_lambda0) << " "
       << hexd(smp.sigma2_lambda1) << "\npi ";
    write_vector(os, smp.pi);
    os << "\ngraphs " << smp.graphs.size() << "\n";
    for (const auto& gs : smp.graphs) write_graph_state(os, gs);
    os << "atoms " << smp.atom_ids.size() << "\n";
    for (std::size_t a = 0; a < smp.atom_ids.size(); ++a) {
      os << smp.atom_ids[a] << " ";
      write_matrix(os, smp.atom_U[a]);
      os << "\n";
    }
  }
}

PosteriorSamples read_samples_body(TokenReader& tr) {
  PosteriorSamples ps;
  tr.expect("config");
  ps.iters = static_cast<int>(tr.integer("iters"));
  ps.burnin = static_cast<int>(tr.integer("burnin"));
  ps.thin = static_cast<int>(tr.integer("thin"));
  ps.seed = tr.u64("seed");
  ps.chain = static_cast<int>(tr.integer("chain"));
  tr.expect("trace");
  const long long ntrace = tr.integer("trace count");
  for (long long i = 0; i < ntrace; ++i) {
    TraceRow row;
    row.sweep = static_cast<int>(tr.integer("sweep"));
    row.log_joint = tr.real("log_joint");
    row.sigma2_e = tr.real("sigma2_e");
    row.occupied_atoms = static_cast<int>(tr.integer("occupied"));
    ps.trace.push_back(row);
  }
  tr.expect("samples");
  const long long nsmp = tr.integer("sample count");
  for (long long i = 0; i < nsmp; ++i) {
    tr.expect("sample");
    PosteriorSample smp;
    smp.sweep = static_cast<int>(tr.integer("sweep"));
    smp.log_joint = tr.real("log_joint");
    smp.sigma2_e = tr.real("sigma2_e");
    smp.w = tr.real("w");
    smp.sigma2_theta = tr.real("sigma2_theta");
    smp.sigma2_lambda0 = tr.real("sigma2_lambda0");
    smp.sigma2_lambda1 = tr.real("sigma2_lambda1");
    tr.expect("pi");
    smp.pi = read_vector(tr, "pi");
    tr.expect("graphs");
    const long long ng = tr.integer("graph count");
    for (long long g = 0; g < ng; ++g) smp.graphs.push_back(read_graph_state(tr));
    tr.expect("atoms");
    const long long na = tr.integer("atom count");
    for (long long a = 0; a < na; ++a) {
      smp.atom_ids.push_back(static_cast<int>(tr.integer("atom id")));
      smp.atom_U.push_back(read_matrix(tr, "atom"));
    }
    ps.samples.push_back(std::move(smp));
  }
  return ps;
}

}  // namespace

// ---- graph files -----------------------------------------------------------

WeightedGraph read_graph_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    auto toks = split_tokens(line);
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  if (lines.empty()) fail(Errc::ParseError, "no data in " + path.string());

  Matrix A;
  if (lines[0].size() == 1) {
    const int n = static_cast<int>(to_ll(lines[0][0], "vertex count"));
    if (n < 1) fail(Errc::ParseError, "vertex count must be >= 1");
    if (static_cast<int>(lines.size()) != n + 1)
      fail(Errc::ParseError, "expected " + std::to_string(n) + " rows in " +
                                 path.string());
    A.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(lines[i + 1].size()) != n)
        fail(Errc::ParseError, "row " + std::to_string(i + 1) + " of " +
                                   path.string() + " has wrong length");
      for (int j = 0; j < n; ++j) A(i, j) = to_double(lines[i + 1][j], "weight");
    }
  } else if (lines[0].size() == 3) {
    int n = 0;
    std::vector<std::tuple<int, int, double>> trip;
    for (const auto& toks : lines) {
      if (toks.size() != 3)
        fail(Errc::ParseError, "triplet line needs 'i j w' in " + path.string());
      const int i = static_cast<int>(to_ll(toks[0], "row index"));
      const int j = static_cast<int>(to_ll(toks[1], "column index"));
      if (i < 1 || j < 1)
        fail(Errc::ParseError, "triplet indices are 1-based in " + path.string());
      trip.emplace_back(i, j, to_double(toks[2], "weight"));
      n = std::max({n, i, j});
    }
    A = Matrix::Zero(n, n);
    for (const auto& [i, j, w] : trip) {
      A(i - 1, j - 1) = w;
      A(j - 1, i - 1) = w;
    }
  } else {
    fail(Errc::ParseError,
         "first data line must hold a vertex count or an 'i j w' triplet");
  }
  return make_graph(std::move(A));
}

void write_graph_csv(const fs::path& path, const WeightedGraph& g) {
  std::ostringstream os;
  os << "# slg-csv v1 graph\n" << g.n << "\n";
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) os << (j ? "," : "") << csv_num(g.A(i, j));
    os << "\n";
  }
  write_text(path, os.str());
}

std::vector<WeightedGraph> read_graph_dir(const fs::path& dir) {
  if (!fs::is_directory(dir))
    fail(Errc::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  if (files.empty())
    fail(Errc::NoGraphsFound, "no .csv graph files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<WeightedGraph> graphs;
  graphs.reserve(files.size());
  for (const auto& f : files) graphs.push_back(read_graph_csv(f));
  return graphs;
}

// ---- CSV -------------------------------------------------------------------

std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // prefer the shortest representation that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
    if (std::strtod(shorter, nullptr) == x) return shorter;
  }
  return buf;
}

void write_csv(const fs::path& path, const std::string& table,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << "# slg-csv v1 " << table << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  write_text(path, os.str());
}

void write_bench_csv(const fs::path& path, const std::vector<BenchRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.method, r.metric, csv_num(r.mean),
                     r.replicates >= 2 && std::isfinite(r.sd) ? csv_num(r.sd)
                                                              : std::string(),
                     std::to_string(r.replicates)});
  write_csv(path, "bench-results", {"method", "metric", "mean", "sd", "replicates"},
            cells);
}

// ---- fit artifacts ---------------------------------------------------------

void save_samples(const fs::path& path, const PosteriorSamples& samples) {
  std::ostringstream os;
  os << "slg-samples v1\n";
  write_samples_body(os, samples);
  write_blob(path, os.str());
}

PosteriorSamples load_samples(const fs::path& path) {
  TokenReader tr(read_blob(path));
  tr.expect("slg-samples");
  tr.expect("v1");
  return read_samples_body(tr);
}

void save_checkpoint(const fs::path& path, const Checkpoint& ck) {
  std::ostringstream os;
  os << "slg-checkpoint v1\n";
  os << "next " << ck.next_sweep << "\n";
  os << "state " << hexd(ck.state.sigma2_e) << " " << hexd(ck.state.w) << " "
     << hexd(ck.state.sigma2_theta) << " " << hexd(ck.state.sigma2_lambda0)
     << " " << hexd(ck.state.sigma2_lambda1) << "\npi ";
  write_vector(os, ck.state.dict.pi);
  os << "\natoms " << ck.state.dict.atoms.size() << "\n";
  for (const auto& atom : ck.state.dict.atoms) {
    write_matrix(os, atom.U);
    os << "\n";
  }
  os << "graphs " << ck.state.graphs.size() << "\n";
  for (const auto& gs : ck.state.graphs) write_graph_state(os, gs);
  write_samples_body(os, ck.collected);
  write_blob(path, os.str());
}

Checkpoint load_checkpoint(const fs::path& path) {
  TokenReader tr(read_blob(path));
  tr.expect("slg-checkpoint");
  tr.expect("v1");
  Checkpoint ck;
  tr.expect("next");
  ck.next_sweep = static_cast<int>(tr.integer("next sweep"));
  tr.expect("state");
  ck.state.sigma2_e = tr.real("sigma2_e");
  ck.state.w = tr.real("w");
  ck.state.sigma2_theta = tr.real("sigma2_theta");
  ck.state.sigma2_lambda0 = tr.real("sigma2_lambda0");
  ck.state.sigma2_lambda1 = tr.real("sigma2_lambda1");
  tr.expect("pi");
  ck.state.dict.pi = read_vector(tr, "pi");
  tr.expect("atoms");
  const long long natoms = tr.integer("atom count");
  for (long long a = 0; a < natoms; ++a)
    ck.state.dict.atoms.push_back({read_matrix(tr, "atom")});
  tr.expect("graphs");
  const long long ng = tr.integer("graph count");
  for (long long g = 0; g < ng; ++g)
    ck.state.graphs.push_back(read_graph_state(tr));
  ck.collected = read_samples_body(tr);
  return ck;
}

// ---- datasets ---------------------------------------------------------------

void write_dataset(const fs::path& dir, const LabeledDataset& ds) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t s = 0; s < ds.graphs.size(); ++s) {
    std::snprintf(name, sizeof name, "graph_%03zu.csv", s);
    write_graph_csv(dir / name, ds.graphs[s]);
  }
  std::ostringstream os;
  os << "# graph vertex label\n";
  for (std::size_t s = 0; s < ds.true_labels.size(); ++s)
    for (int i = 0; i < ds.true_labels[s].size(); ++i)
      os << (s + 1) << " " << (i + 1) << " " << ds.true_labels[s](i) << "\n";
  if (!ds.true_pattern.empty()) {
    os << "# graph pattern\n";
    for (std::size_t s = 0; s < ds.true_pattern.size(); ++s)
      os << (s + 1) << " " << ds.true_pattern[s] << "\n";
  }
  write_text(dir / "truth_labels.txt", os.str());
  write_text(dir / "manifest.txt", ds.manifest);
}

}  // namespace slg
