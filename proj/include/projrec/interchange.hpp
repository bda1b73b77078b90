#pragma once

// The JSON interchange document read and written by the command-line tool.
//
//   {
//     "version": "projrec/1",
//     "correspondences": [[x1, x2, y1, y2], ...],
//     "fundamental": [[f11, f12, f13], [..], [..]],
//     "candidates": [F, F, ...],
//     "cameras": [P1, P2],                  3x4 row-major arrays
//     "points": [[w1, w2, w3, w4] | null, ...],
//     "homography": [[h11, h12, h13], [..], [..]] | null,
//     "verdict": {"status": "...", "nullspace_dim": n,
//                 "irregular": [{"index": i, "status": "IrregularLeft"}]}
//   }
//
// Every key except "version" is optional. Doubles are written in their
// shortest round-trip form, so parse(emit(doc)) reproduces every value.

#include "projrec/decision.hpp"
#include "projrec/synth.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace projrec {

inline constexpr const char* kDocumentVersion = "projrec/1";

struct VerdictRecord {
  std::string status;
  int nullspace_dim = 0;
  std::vector<std::pair<std::size_t, std::string>> irregular;

  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

struct InterchangeDocument {
  std::string version = kDocumentVersion;
  std::vector<Correspondence> correspondences;
  std::optional<Mat3> fundamental;
  std::optional<std::vector<Mat3>> candidates;
  std::optional<std::vector<Mat34>> cameras;
  std::optional<std::vector<std::optional<Vec4>>> points;
  /// Outer optional: key present. Inner optional: null means "no homography exists".
  std::optional<std::optional<Mat3>> homography;
  std::optional<VerdictRecord> verdict;

  friend bool operator==(const InterchangeDocument&, const InterchangeDocument&) = default;

  CorrespondenceSet correspondence_set() const {
    if (correspondences.empty()) throw Error(Errc::Malformed, "document has no correspondences");
    return CorrespondenceSet(correspondences);
  }
};

namespace detail {

template <typename M>
nlohmann::ordered_json matrix_to_json(const M& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw Error(Errc::Malformed, std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(Errc::Malformed, std::string(what) + ": non-finite number");
  return v;
}

template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols> matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != Rows) {
    throw Error(Errc::Malformed, std::string(what) + ": expected " + std::to_string(Rows) + " rows");
  }
  Eigen::Matrix<double, Rows, Cols> m;
  for (int i = 0; i < Rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != Cols) {
      throw Error(Errc::Malformed, std::string(what) + ": expected rows of " + std::to_string(Cols));
    }
    for (int k = 0; k < Cols; ++k) m(i, k) = number(row[k], what);
  }
  return m;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const InterchangeDocument& doc) {
  using json = nlohmann::ordered_json;
  json j = json::object();
  j["version"] = doc.version;
  json corrs = json::array();
  for (const auto& c : doc.correspondences) corrs.push_back({c.x.x1, c.x.x2, c.y.x1, c.y.x2});
  j["correspondences"] = std::move(corrs);
  if (doc.fundamental) j["fundamental"] = detail::matrix_to_json(*doc.fundamental);
  if (doc.candidates) {
    json list = json::array();
    for (const auto& F : *doc.candidates) list.push_back(detail::matrix_to_json(F));
    j["candidates"] = std::move(list);
  }
  if (doc.cameras) {
    json list = json::array();
    for (const auto& P : *doc.cameras) list.push_back(detail::matrix_to_json(P));
    j["cameras"] = std::move(list);
  }
  if (doc.points) {
    json list = json::array();
    for (const auto& w : *doc.points) {
      if (w) {
        list.push_back({(*w)[0], (*w)[1], (*w)[2], (*w)[3]});
      } else {
        list.push_back(nullptr);
      }
    }
    j["points"] = std::move(list);
  }
  if (doc.homography) {
    j["homography"] = *doc.homography ? detail::matrix_to_json(**doc.homography) : json(nullptr);
  }
  if (doc.verdict) {
    json irregular = json::array();
    for (const auto& [index, status] : doc.verdict->irregular) {
      irregular.push_back({{"index", index}, {"status", status}});
    }
    j["verdict"] = {{"status", doc.verdict->status},
                    {"nullspace_dim", doc.verdict->nullspace_dim},
                    {"irregular", std::move(irregular)}};
  }
  return j;
}

namespace detail {

/// Two-space indented layout with arrays of scalars kept on one line, so
/// matrices print row by row.
inline void write_pretty(const nlohmann::ordered_json& j, int depth, std::string& out) {
  const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
  const std::string close_pad(2 * static_cast<std::size_t>(depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad + nlohmann::ordered_json(key).dump() + ": ";
      write_pretty(value, depth + 1, out);
    }
    out += "\n" + close_pad + "}";
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& e : j) flat = flat && !e.is_structured();
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) out += (i > 0 ? ", " : "") + j[i].dump();
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i > 0) out += ",\n";
      out += pad;
      write_pretty(j[i], depth + 1, out);
    }
    out += "\n" + close_pad + "]";
  } else {
    out += j.dump();
  }
}

}  // namespace detail

inline std::string emit(const InterchangeDocument& doc) {
  std::string out;
  detail::write_pretty(to_json(doc), 0, out);
  return out + "\n";
}

inline InterchangeDocument from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::Malformed, "document must be a JSON object");
  InterchangeDocument doc;
  if (!j.contains("version") || !j["version"].is_string()) throw Error(Errc::Malformed, "missing \"version\"");
  doc.version = j["version"].get<std::string>();
  if (doc.version != kDocumentVersion) throw Error(Errc::Malformed, "unsupported version '" + doc.version + "'");

  if (j.contains("correspondences")) {
    const auto& list = j["correspondences"];
    if (!list.is_array()) throw Error(Errc::Malformed, "correspondences: expected an array");
    for (const auto& c : list) {
      if (!c.is_array() || c.size() != 4) throw Error(Errc::Malformed, "correspondences: expected [x1, x2, y1, y2]");
      doc.correspondences.push_back({{detail::number(c[0], "correspondences"), detail::number(c[1], "correspondences")},
                                     {detail::number(c[2], "correspondences"), detail::number(c[3], "correspondences")}});
    }
  }
  if (j.contains("fundamental")) doc.fundamental = detail::matrix_from_json<3, 3>(j["fundamental"], "fundamental");
  if (j.contains("candidates")) {
    if (!j["candidates"].is_array()) throw Error(Errc::Malformed, "candidates: expected an array");
    doc.candidates.emplace();
    for (const auto& F : j["candidates"]) doc.candidates->push_back(detail::matrix_from_json<3, 3>(F, "candidates"));
  }
  if (j.contains("cameras")) {
    if (!j["cameras"].is_array()) throw Error(Errc::Malformed, "cameras: expected an array");
    doc.cameras.emplace();
    for (const auto& P : j["cameras"]) doc.cameras->push_back(detail::matrix_from_json<3, 4>(P, "cameras"));
  }
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw Error(Errc::Malformed, "points: expected an array");
    doc.points.emplace();
    for (const auto& w : j["points"]) {
      if (w.is_null()) {
        doc.points->emplace_back(std::nullopt);
        continue;
      }
      if (!w.is_array() || w.size() != 4) throw Error(Errc::Malformed, "points: expected 4-arrays or null");
      doc.points->emplace_back(Vec4(detail::number(w[0], "points"), detail::number(w[1], "points"),
                                    detail::number(w[2], "points"), detail::number(w[3], "points")));
    }
  }
  if (j.contains("homography")) {
    const auto& h = j["homography"];
    doc.homography = h.is_null() ? std::optional<Mat3>() : std::optional<Mat3>(detail::matrix_from_json<3, 3>(h, "homography"));
  }
  if (j.contains("verdict")) {
    const auto& v = j["verdict"];
    if (!v.is_object() || !v.contains("status") || !v["status"].is_string()) {
      throw Error(Errc::Malformed, "verdict: expected an object with a status");
    }
    VerdictRecord record;
    record.status = v["status"].get<std::string>();
    if (v.contains("nullspace_dim")) {
      if (!v["nullspace_dim"].is_number_integer()) throw Error(Errc::Malformed, "verdict.nullspace_dim: expected an integer");
      record.nullspace_dim = v["nullspace_dim"].get<int>();
    }
    if (v.contains("irregular")) {
      if (!v["irregular"].is_array()) throw Error(Errc::Malformed, "verdict.irregular: expected an array");
      for (const auto& item : v["irregular"]) {
        if (!item.is_object() || !item.contains("index") || !item["index"].is_number_unsigned() ||
            !item.contains("status") || !item["status"].is_string()) {
          throw Error(Errc::Malformed, "verdict.irregular: expected {index, status} objects");
        }
        record.irregular.emplace_back(item["index"].get<std::size_t>(), item["status"].get<std::string>());
      }
    }
    doc.verdict = std::move(record);
  }
  return doc;
}

inline InterchangeDocument parse_document(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Malformed, e.what());
  }
  return from_json(j);
}

inline InterchangeDocument to_document(const CorrespondenceSet& corrs) {
  InterchangeDocument doc;
  doc.correspondences = corrs.pairs();
  return doc;
}

inline VerdictRecord to_record(const Verdict& v) {
  VerdictRecord r;
  r.status = std::string(to_string(v.status));
  r.nullspace_dim = v.nullspace_dim;
  for (const auto& item : v.irregular) r.irregular.emplace_back(item.index, std::string(to_string(item.status)));
  return r;
}

/// Document for a decided correspondence set, with all certificates.
inline InterchangeDocument to_document(const CorrespondenceSet& corrs, const Verdict& v) {
  InterchangeDocument doc = to_document(corrs);
  doc.verdict = to_record(v);
  if (v.fundamental) doc.fundamental = v.fundamental->matrix();
  if (v.homography) doc.homography = std::optional<Mat3>(v.homography->matrix());
  if (v.reconstruction) {
    doc.cameras = std::vector<Mat34>{v.reconstruction->P1.matrix(), v.reconstruction->P2.matrix()};
    doc.points.emplace();
    for (const auto& w : v.reconstruction->ws) doc.points->emplace_back(w.vec());
  }
  return doc;
}

inline InterchangeDocument to_document(const SynthScene& scene) {
  InterchangeDocument doc = to_document(scene.corrs);
  doc.cameras = std::vector<Mat34>{scene.P1.matrix(), scene.P2.matrix()};
  doc.points.emplace();
  for (const auto& w : scene.points) {
    doc.points->emplace_back(w ? std::optional<Vec4>(w->vec()) : std::nullopt);
  }
  return doc;
}

}  // namespace projrec
