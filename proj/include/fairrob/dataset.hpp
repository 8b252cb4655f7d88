#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairrob/error.hpp"
#include "fairrob/mixture_types.hpp"
#include "fairrob/rng.hpp"

namespace fairrob {

// (X_i, A_i, Y_i) triples. Features are row-major n x d; groups index the
// protected attribute, labels the class. Datasets are immutable once built.
struct LabeledDataset {
  std::vector<double> features;  // n * dim
  std::vector<int> groups;
  std::vector<int> labels;
  std::size_t n = 0;
  std::size_t dim = 0;
  int num_classes = 0;
  int num_groups = 0;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  void validate() const {
    require(n >= 1, "LabeledDataset: empty dataset");
    require(features.size() == n * dim, "LabeledDataset: feature size mismatch");
    require(groups.size() == n && labels.size() == n,
            "LabeledDataset: group/label size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      require(labels[i] >= 0 && labels[i] < num_classes,
              "LabeledDataset: label out of range at row ", i);
      require(groups[i] >= 0 && groups[i] < num_groups,
              "LabeledDataset: group out of range at row ", i);
    }
  }
};

struct MixtureSampleConfig {
  GaussianMixtureSpec spec;
  std::size_t n;
  std::uint64_t seed;
  std::size_t dims = 1;  // features past the first are N(0,1) noise

  MixtureSampleConfig(GaussianMixtureSpec s, std::size_t count, std::uint64_t sd,
                      std::size_t d = 1)
      : spec(s), n(count), seed(sd), dims(d) {
    require(dims >= 1, "MixtureSampleConfig: dims must be >= 1");
  }
};

// Draws labels from the prior, feature 0 from the class-conditional Gaussian,
// extra dims from N(0,1). Groups equal labels (A = Y); label 0 is class -1,
// label 1 is class +1.
inline LabeledDataset sample_mixture(const MixtureSampleConfig& cfg) {
  LabeledDataset ds;
  ds.n = cfg.n;
  ds.dim = cfg.dims;
  ds.num_classes = 2;
  ds.num_groups = 2;
  ds.features.resize(cfg.n * cfg.dims);
  ds.groups.resize(cfg.n);
  ds.labels.resize(cfg.n);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const bool plus = rng.uniform() < cfg.spec.prior_plus;
    ds.labels[i] = plus ? 1 : 0;
    ds.groups[i] = ds.labels[i];
    double* x = ds.features.data() + i * cfg.dims;
    x[0] = plus ? cfg.spec.mu_plus + cfg.spec.k_ratio * rng.normal()
                : cfg.spec.mu_minus + rng.normal();
    for (std::size_t j = 1; j < cfg.dims; ++j) x[j] = rng.normal();
  }
  return ds;
}

// ---- CSV ----

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  fail("load_csv: missing column '", name, "'");
}

// dense re-indexing preserving first-appearance order
struct Reindexer {
  std::map<std::string, int> ids;
  std::vector<std::string> names;

  int get(const std::string& raw) {
    auto it = ids.find(raw);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(names.size());
    ids.emplace(raw, id);
    names.push_back(raw);
    return id;
  }
};

}  // namespace detail

// Tabular loader: header row required, features parsed as 64-bit reals,
// labels and groups densely re-indexed from 0 in first-appearance order.
inline LabeledDataset load_csv(const std::string& path,
                               const std::vector<std::string>& feature_cols,
                               const std::string& label_col,
                               const std::string& group_col) {
  std::ifstream in(path);
  require(in.good(), "load_csv: cannot open ", path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "load_csv: empty file ", path);
  const auto header = detail::split_csv_line(line);
  std::vector<int> fidx;
  for (const auto& c : feature_cols) fidx.push_back(detail::find_column(header, c));
  const int lidx = detail::find_column(header, label_col);
  const int gidx = detail::find_column(header, group_col);

  LabeledDataset ds;
  ds.dim = fidx.size();
  detail::Reindexer labels, groups;
  std::size_t rownum = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++rownum;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    require(cells.size() == header.size(), "load_csv: row ", rownum, " has ",
            cells.size(), " cells, expected ", header.size());
    for (std::size_t j = 0; j < fidx.size(); ++j) {
      const std::string& cell = cells[fidx[j]];
      std::size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      require(pos == cell.size() && !cell.empty(), "load_csv: non-numeric feature at row ",
              rownum, ", column '", feature_cols[j], "': '", cell, "'");
      ds.features.push_back(v);
    }
    ds.labels.push_back(labels.get(cells[lidx]));
    ds.groups.push_back(groups.get(cells[gidx]));
    ++ds.n;
  }
  require(ds.n >= 1, "load_csv: no data rows in ", path);
  ds.num_classes = static_cast<int>(labels.names.size());
  ds.num_groups = static_cast<int>(groups.names.size());
  ds.validate();
  return ds;
}

inline void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "save_csv: cannot open ", path);
  for (std::size_t j = 0; j < ds.dim; ++j) out << "x" << j << ",";
  out << "label,group\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.n; ++i) {
    const auto x = ds.row(i);
    for (std::size_t j = 0; j < ds.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
      out << buf << ",";
    }
    out << ds.labels[i] << "," << ds.groups[i] << "\n";
  }
}

// ---- IDX (ubyte image/label pair) ----

namespace detail {

inline std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  require(in.good(), "load_idx: truncated header in ", path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// Standard IDX ubyte layout: big-endian magic + dimensions, then raw bytes.
// Pixels are scaled to [0,1]; groups are set equal to labels.
inline LabeledDataset load_idx(const std::string& images_path,
                               const std::string& labels_path,
                               std::size_t max_items = SIZE_MAX) {
  std::ifstream img(images_path, std::ios::binary);
  require(img.good(), "load_idx: cannot open ", images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  require(lab.good(), "load_idx: cannot open ", labels_path);

  const auto img_magic = detail::read_be_u32(img, images_path);
  require(img_magic == 0x00000803u, "load_idx: bad image magic 0x", std::hex, img_magic,
          " in ", images_path, " (expected 0x803)");
  const std::size_t img_count = detail::read_be_u32(img, images_path);
  const std::size_t rows = detail::read_be_u32(img, images_path);
  const std::size_t cols = detail::read_be_u32(img, images_path);

  const auto lab_magic = detail::read_be_u32(lab, labels_path);
  require(lab_magic == 0x00000801u, "load_idx: bad label magic 0x", std::hex, lab_magic,
          " in ", labels_path, " (expected 0x801)");
  const std::size_t lab_count = detail::read_be_u32(lab, labels_path);
  require(img_count == lab_count, "load_idx: image count ", img_count,
          " != label count ", lab_count);

  const std::size_t n = std::min(img_count, max_items);
  const std::size_t dim = rows * cols;
  require(dim > 0, "load_idx: zero image dimensions");

  LabeledDataset ds;
  ds.n = n;
  ds.dim = dim;
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  ds.groups.resize(n);

  std::vector<unsigned char> pixel_buf(dim);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim));
    require(img.good(), "load_idx: truncated image data at item ", i);
    for (std::size_t j = 0; j < dim; ++j)
      ds.features[i * dim + j] = pixel_buf[j] / 255.0;
    unsigned char y;
    lab.read(reinterpret_cast<char*>(&y), 1);
    require(lab.good(), "load_idx: truncated label data at item ", i);
    ds.labels[i] = y;
    ds.groups[i] = y;  // labels are also protected groups
    max_label = std::max(max_label, static_cast<int>(y));
  }
  ds.num_classes = max_label + 1;
  ds.num_groups = max_label + 1;
  ds.validate();
  return ds;
}

}  // namespace fairrob
