#pragma once

// Command-line front end. run() is the whole program minus process plumbing,
// so tests can drive it with string streams.

#include "projrec/interchange.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace projrec::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInconclusive = 2 };

struct Options {
  Tolerances tol;
  std::uint64_t seed = 1;
  std::string in = "-";
  std::string out;
  bool quiet = false;
  SceneConfig scene;
  std::string kind = "finite-noncoincident";
};

namespace detail {

inline std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline InterchangeDocument read_document(const Options& opt, std::istream& in) {
  if (opt.in == "-") return parse_document(read_all(in));
  std::ifstream file(opt.in);
  if (!file) throw Error(Errc::Malformed, "cannot open input '" + opt.in + "'");
  return parse_document(read_all(file));
}

/// Triangulates every pair under arbitrary rank-3 cameras by moving the first
/// camera to (I | 0), solving there and mapping the points back.
inline std::vector<HomPoint3> triangulate_all(const Camera& P1, const Camera& P2, const CorrespondenceSet& corrs,
                                              const Tolerances& tol) {
  const Homography4 H = canonical_homography(P1, tol);
  const Camera moved(P2.matrix() * H.inverse(), tol);
  const Mat3 A = moved.A();
  const Vec3 b = moved.b();
  const bool same_center = b.norm() <= tol.rank_rel * moved.matrix().norm();
  std::vector<HomPoint3> ws;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const auto& c = corrs[i];
    try {
      Vec4 w;
      if (same_center) {
        const Vec3 image = A * lifted(c.x);
        if (!(image.norm() > 0.0) || !proportional(image, lifted(c.y), tol)) {
          throw Error(Errc::EpipolarViolated, "pair is not mapped by the coincident cameras");
        }
        w << lifted(c.x), 1.0;
      } else {
        w = triangulate(A, b, c.x, c.y, tol).vec();
      }
      ws.emplace_back(H.inverse() * w);
    } catch (const Error& e) {
      throw Error(e.code(), "pair " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!verify_reconstruction(P1, P2, ws, corrs, tol)) {
    throw Error(Errc::WitnessInvalid, "triangulated points failed verification");
  }
  return ws;
}

inline std::pair<Camera, Camera> cameras_from(const InterchangeDocument& doc, const Tolerances& tol) {
  if (!doc.cameras || doc.cameras->size() != 2) throw Error(Errc::Malformed, "document needs exactly two cameras");
  return {Camera((*doc.cameras)[0], tol), Camera((*doc.cameras)[1], tol)};
}

}  // namespace detail

/// Runs the tool on args (args[0] is the program name). Returns the exit code.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-view projective reconstruction toolkit", "projrec"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--tol-rank", opt.tol.rank_rel, "relative singular value cutoff");
  app.add_option("--tol-prop", opt.tol.prop_rel, "proportionality cutoff");
  app.add_option("--tol-residual", opt.tol.residual_abs, "normalized epipolar residual cutoff");
  app.add_option("--seed", opt.seed, "seed for synth");
  app.add_option("--out", opt.out, "write the document to this path instead of stdout");
  app.add_flag("--quiet", opt.quiet, "print only the summary line on stdout");

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("input", opt.in, "input document (default: stdin)");
  };
  CLI::App* check = app.add_subcommand("check", "decide reconstructability and emit certificates");
  CLI::App* fundamental = app.add_subcommand("fundamental", "list rank-2 fundamental matrix candidates");
  CLI::App* cameras = app.add_subcommand("cameras", "finite camera pair from a fundamental matrix");
  CLI::App* tri = app.add_subcommand("triangulate", "world points for cameras and correspondences");
  CLI::App* equiv = app.add_subcommand("equiv", "projective equivalence of the two images");
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic scene");
  for (CLI::App* sub : {check, fundamental, cameras, tri, equiv}) add_input(sub);
  synth_cmd->add_option("--m", opt.scene.m, "number of generated pairs");
  synth_cmd->add_option("--kind", opt.kind, "finite-noncoincident | finite-coincident | infinite-second");
  synth_cmd->add_option("--infinite", opt.scene.infinite_point_count, "world points at infinity");
  synth_cmd->add_flag("--plant-epipole", opt.scene.plant_epipole_pair, "append an epipole-epipole pair");
  synth_cmd->add_flag("--plant-irregular", opt.scene.plant_irregular_pair, "append an irregular pair");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  auto emit_result = [&](const InterchangeDocument& doc, const std::string& summary) {
    const std::string text = emit(doc);
    if (!opt.out.empty()) {
      std::ofstream file(opt.out, std::ios::binary);
      if (!file) throw Error(Errc::Malformed, "cannot open output '" + opt.out + "'");
      file << text;
    } else if (!opt.quiet) {
      out << text;
    }
    (opt.quiet ? out : err) << summary << "\n";
  };

  try {
    opt.tol.validate();
    if (synth_cmd->parsed()) {
      opt.scene.seed = opt.seed;
      opt.scene.camera_kind = parse_camera_kind(opt.kind);
      const SynthScene scene = synth(opt.scene, opt.tol);
      emit_result(to_document(scene), "synth: " + std::to_string(scene.corrs.size()) + " pairs, " +
                                          std::string(to_string(opt.scene.camera_kind)) + ", seed " +
                                          std::to_string(opt.seed));
      return kOk;
    }

    const InterchangeDocument input = detail::read_document(opt, in);

    if (check->parsed()) {
      const CorrespondenceSet corrs = input.correspondence_set();
      const Verdict v = decide(corrs, opt.tol);
      std::string summary = "check: " + std::string(to_string(v.status)) + " (m=" + std::to_string(corrs.size()) +
                            ", nullspace_dim=" + std::to_string(v.nullspace_dim) + ")";
      for (const auto& item : v.irregular) {
        summary += "\n  pair " + std::to_string(item.index) + ": " + std::string(to_string(item.status));
      }
      emit_result(to_document(corrs, v), summary);
      return v.status == Status::Inconclusive ? kInconclusive : kOk;
    }
    if (fundamental->parsed()) {
      const CorrespondenceSet corrs = input.correspondence_set();
      const CandidateSearch search = search_fundamental(corrs, opt.tol);
      InterchangeDocument doc = to_document(corrs);
      doc.candidates.emplace();
      for (const auto& F : search.candidates) doc.candidates->push_back(F.matrix());
      if (!search.candidates.empty()) doc.fundamental = search.candidates.front().matrix();
      emit_result(doc, "fundamental: " + std::to_string(search.candidates.size()) + " candidate(s), nullspace_dim=" +
                           std::to_string(search.nullspace_dim) + (search.exhaustive ? "" : " (search not exhaustive)"));
      return kOk;
    }
    if (cameras->parsed()) {
      if (!input.fundamental) throw Error(Errc::Malformed, "document has no fundamental matrix");
      const FundamentalMatrix F(*input.fundamental, opt.tol);
      const auto [P1, P2] = finite_pair_from_fundamental(F, opt.tol);
      InterchangeDocument doc = input;
      doc.fundamental = F.matrix();
      doc.cameras = std::vector<Mat34>{P1.matrix(), P2.matrix()};
      emit_result(doc, "cameras: finite non-coincident pair for the given F");
      return kOk;
    }
    if (tri->parsed()) {
      const CorrespondenceSet corrs = input.correspondence_set();
      const auto [P1, P2] = detail::cameras_from(input, opt.tol);
      const auto ws = detail::triangulate_all(P1, P2, corrs, opt.tol);
      InterchangeDocument doc = input;
      doc.points.emplace();
      for (const auto& w : ws) doc.points->emplace_back(w.vec());
      emit_result(doc, "triangulate: " + std::to_string(ws.size()) + " point(s)");
      return kOk;
    }
    if (equiv->parsed()) {
      const CorrespondenceSet corrs = input.correspondence_set();
      const auto H = projective_equivalence(corrs, opt.tol);
      InterchangeDocument doc = to_document(corrs);
      doc.homography = H ? std::optional<Mat3>(H->matrix()) : std::nullopt;
      emit_result(doc, H ? "equiv: projectively equivalent" : "equiv: no nonsingular homography");
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace projrec::cli
