// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

#include "mxemu/analysis.hpp"
#include "mxemu/error.hpp"
#include "mxemu/gemm.hpp"
#include "mxemu/lloydmax.hpp"
#include "mxemu/quantizer.hpp"
#include "mxemu/rotation.hpp"
#include "mxemu/tensor_io.hpp"

namespace mxemu::cli {

using nlohmann::json;

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

struct QuantFlags {
  std::string format;
  std::string scale = "pot_floor";
  std::string group_size = "32";
  int axis = -1;

  QuantConfig resolve() const {
    const FormatSpec fs = parse_format_name(format);
    QuantConfig cfg;
    cfg.format = fs.format;
    cfg.asymmetric = fs.asymmetric;
    cfg.scale_mode = ScaleMode::from_name(scale);
    cfg.group_size = GroupSize::parse(group_size);
    cfg.axis = axis;
    cfg.validate();
    return cfg;
  }
};

struct LloydFlags {
  std::size_t clusters = 16;
  std::size_t iters = 100;
  std::size_t levels = 16;
  std::uint64_t seed = 0;
  std::string init = "quantile";
  std::string grid_format = "fp4_e2m1_asym";
  std::string grid_scale = "fp8e5m2";

  LloydConfig config() const {
    LloydConfig c{clusters, iters, levels, seed};
    c.validate();
    return c;
  }

  ReferenceOptions options() const {
    ReferenceOptions o;
    if (init == "quantile") {
      o.init = ReferenceOptions::Init::kQuantile;
    } else if (init == "grid") {
      o.init = ReferenceOptions::Init::kFormatGrid;
      const FormatSpec fs = parse_format_name(grid_format);
      o.grid_config.format = fs.format;
      o.grid_config.asymmetric = fs.asymmetric;
      o.grid_config.scale_mode = ScaleMode::from_name(grid_scale);
    } else {
      throw ConfigError("unknown Lloyd init '" + init +
                        "'; valid: quantile, grid");
    }
    return o;
  }
};

DType resolve_dtype(const std::string& flag, DType input) {
  if (flag == "auto") return input;
  if (flag == "f32") return DType::kFloat32;
  if (flag == "f64") return DType::kFloat64;
  throw ConfigError("unknown dtype '" + flag + "'; valid: auto, f32, f64");
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

json five_json(const FiveNumber& f) {
  return json{{"min", f.min},       {"q1", f.q1}, {"median", f.median},
              {"q3", f.q3},         {"max", f.max}};
}

json summary_json(const StatsSummary& s) {
  return json{{"groups", s.groups},
              {"mean", five_json(s.mean)},
              {"kurtosis", five_json(s.kurtosis)},
              {"undefined_kurtosis", s.undefined_kurtosis}};
}

json report_json(const ErrorReport& r) {
  return json{{"elements", r.element_count},
              {"mse", r.mse},
              {"total_sq_error", r.total_sq_error},
              {"clamp_sq_error", r.clamp_sq_error},
              {"round_sq_error", r.round_sq_error},
              {"clamped", r.clamped_count}};
}

// Summary of the input's group statistics, or null when every group is
// constant.
json stats_or_null(const Tensor& x, GroupSize gs, int axis) {
  try {
    return summary_json(stats_summary(group_stats(x, gs, axis)));
  } catch (const DataError&) {
    return nullptr;
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw ShapeError("cannot compare " + shape_to_string(a.shape) + " with " +
                     shape_to_string(b.shape));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

// --- commands --------------------------------------------------------------

struct QuantizeCmd {
  std::string in, out, json_path, codes_out, out_dtype = "auto";
  QuantFlags q;
  bool dump_unique = false;

  void run(std::ostream& os) const {
    const QuantConfig cfg = q.resolve();
    const DType requested = resolve_dtype(out_dtype, DType::kFloat32);
    const TensorFile f = load_tensor(in);
    const QuantizedTensor qt = quantize(f.tensor, cfg);
    const Tensor y = dequantize(qt);
    if (!out.empty()) {
      write_tensor_file(out, y, out_dtype == "auto" ? f.dtype : requested);
    }
    if (!codes_out.empty()) write_bytes(codes_out, encode_quantized(qt));
    if (dump_unique) {
      const std::set<double> uniq(y.data.begin(), y.data.end());
      for (double v : uniq) os << format_shortest(v) << "\n";
    }
    if (!json_path.empty()) {
      json j = report_json(error_decomposition(f.tensor, cfg));
      j["format"] = format_name(cfg.format, cfg.asymmetric);
      j["scale_mode"] = cfg.scale_mode.name();
      j["group_size"] = cfg.group_size.to_string();
      emit_json(j, json_path, os);
    }
  }
};

struct CompareCmd {
  std::string in, json_path = "-";
  std::vector<std::string> formats;
  QuantFlags q;
  bool lloyd = false;
  LloydFlags lf;

  void run(std::ostream& os) const {
    if (formats.empty()) throw ConfigError("compare needs at least one format");
    std::vector<QuantConfig> cfgs;
    for (const auto& name : formats) {
      QuantFlags each = q;
      each.format = name;
      cfgs.push_back(each.resolve());
    }
    const LloydConfig lcfg = lf.config();
    const ReferenceOptions lopts = lf.options();
    const Tensor x = load_tensor(in).tensor;

    json rows = json::array();
    for (const auto& cfg : cfgs) {
      json row = report_json(error_decomposition(x, cfg));
      row["format"] = format_name(cfg.format, cfg.asymmetric);
      row["scale_mode"] = cfg.scale_mode.name();
      row["group_size"] = cfg.group_size.to_string();
      rows.push_back(row);
    }
    const GroupSize gs = GroupSize::parse(q.group_size);
    if (lloyd) {
      if (q.axis != -1 && normalize_axis(q.axis, x.rank()) != x.rank() - 1) {
        throw ConfigError("the Lloyd-Max reference groups along the last axis");
      }
      const ReferenceResult ref = reference_quantize(x, gs, lcfg, lopts);
      json row = report_json(ref.report);
      row["format"] = "lloyd_max";
      row["scale_mode"] = nullptr;
      row["group_size"] = gs.to_string();
      row["clusters"] = lcfg.n_clusters;
      row["levels"] = lcfg.n_levels;
      rows.push_back(row);
    }
    json j{{"input_shape", x.shape},
           {"rows", rows},
           {"stats", stats_or_null(x, gs, q.axis)}};
    emit_json(j, json_path, os);
  }
};

struct StatsCmd {
  std::string in, json_path = "-", group_size = "32";
  int axis = -1;

  void run(std::ostream& os) const {
    const GroupSize gs = GroupSize::parse(group_size);
    const Tensor x = load_tensor(in).tensor;
    const auto stats = group_stats(x, gs, axis);
    json groups = json::array();
    for (const auto& s : stats) {
      groups.push_back({{"group", s.group_index},
                        {"mean", s.mean},
                        {"kurtosis", s.kurtosis ? json(*s.kurtosis) : json()}});
    }
    json j{{"group_size", gs.to_string()},
           {"groups", stats.size()},
           {"summary", summary_json(stats_summary(stats))},
           {"per_group", groups}};
    emit_json(j, json_path, os);
  }
};

struct RotateCmd {
  std::string in, out, reference, out_dtype = "auto";
  int dim_axis = -1;
  std::uint64_t seed = 0;
  bool transpose = false;

  void run(std::ostream& os) const {
    const DType requested = resolve_dtype(out_dtype, DType::kFloat32);
    const TensorFile f = load_tensor(in);
    if (f.tensor.rank() == 0) throw ShapeError("cannot rotate a scalar");
    const std::size_t ax = normalize_axis(dim_axis, f.tensor.rank());
    const RotationSpec spec = make_rotation(f.tensor.shape[ax], seed);
    const Tensor y = rotate(f.tensor, spec, dim_axis, transpose);
    if (!out.empty()) {
      write_tensor_file(out, y, out_dtype == "auto" ? f.dtype : requested);
    }
    if (!reference.empty()) {
      const Tensor ref = load_tensor(reference).tensor;
      os << "max_abs_diff " << format_shortest(max_abs_diff(y, ref)) << "\n";
    }
  }
};

struct MatmulCmd {
  std::string a, b, out, accum = "f64", format_b, scale_b, out_dtype = "f32";
  QuantFlags q;
  bool oracle_check = false;

  void run(std::ostream& os) const {
    QuantFlags qb = q;
    if (!format_b.empty()) qb.format = format_b;
    if (!scale_b.empty()) qb.scale = scale_b;
    QuantConfig ca = q.resolve();
    QuantConfig cb = qb.resolve();
    ca.axis = 1;
    cb.axis = 0;
    AccumSpec spec;
    if (accum == "f64") {
      spec.width = AccumSpec::Width::kFloat64Reference;
    } else if (accum == "f32") {
      spec.width = AccumSpec::Width::kFloat32;
    } else {
      throw ConfigError("unknown accumulation '" + accum + "'; valid: f64, f32");
    }
    const DType dtype = resolve_dtype(out_dtype, DType::kFloat32);

    const Tensor ta = load_tensor(a).tensor;
    const Tensor tb = load_tensor(b).tensor;
    if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[1] != tb.shape[0]) {
      throw ShapeError("matmul shape mismatch: " + shape_to_string(ta.shape) +
                       " x " + shape_to_string(tb.shape));
    }
    const QuantizedTensor qa = quantize(ta, ca);
    const QuantizedTensor qb_t = quantize(tb, cb);
    const Tensor y = matmul(qa, qb_t, spec);
    if (!out.empty()) write_tensor_file(out, y, dtype);
    if (oracle_check) {
      os << "max_abs_diff "
         << format_shortest(max_abs_diff(y, dequantized_matmul(qa, qb_t)))
         << "\n";
    }
  }
};

struct LloydCmd {
  std::string in, out, json_path = "-", group_size = "32", out_dtype = "auto";
  LloydFlags lf;

  void run(std::ostream& os) const {
    const GroupSize gs = GroupSize::parse(group_size);
    const LloydConfig cfg = lf.config();
    const ReferenceOptions opts = lf.options();
    const DType requested = resolve_dtype(out_dtype, DType::kFloat32);
    const TensorFile f = load_tensor(in);
    const ReferenceResult ref = reference_quantize(f.tensor, gs, cfg, opts);
    if (!out.empty()) {
      write_tensor_file(out, ref.reconstruction,
                        out_dtype == "auto" ? f.dtype : requested);
    }
    json books = json::array();
    for (std::size_t c = 0; c < ref.codebooks.size(); ++c) {
      if (ref.codebooks[c].levels.empty()) continue;
      const auto members = std::count(ref.clustering.assignment.begin(),
                                       ref.clustering.assignment.end(), c);
      books.push_back({{"cluster", c},
                       {"groups", members},
                       {"levels", ref.codebooks[c].levels}});
    }
    json j = report_json(ref.report);
    j["group_size"] = gs.to_string();
    j["clusters"] = cfg.n_clusters;
    j["iters"] = cfg.n_iters;
    j["levels"] = cfg.n_levels;
    j["seed"] = cfg.seed;
    j["codebooks"] = books;
    emit_json(j, json_path, os);
  }
};

void add_quant_flags(CLI::App* cmd, QuantFlags& q, bool format_required) {
  auto* f = cmd->add_option("--format", q.format,
                            "Element format, e.g. fp4_e2m1 or fp4_e2m1_asym");
  if (format_required) f->required();
  cmd->add_option("--scale", q.scale, "Shared-scale mode")
      ->capture_default_str();
  cmd->add_option("--group-size", q.group_size, "Group size or 'row'")
      ->capture_default_str();
  cmd->add_option("--axis", q.axis, "Quantization axis")->capture_default_str();
}

void add_lloyd_flags(CLI::App* cmd, LloydFlags& lf) {
  cmd->add_option("--clusters", lf.clusters, "Group clusters")
      ->capture_default_str();
  cmd->add_option("--iters", lf.iters, "Lloyd iterations")->capture_default_str();
  cmd->add_option("--levels", lf.levels, "Levels per codebook")
      ->capture_default_str();
  cmd->add_option("--seed", lf.seed, "Clustering seed")->capture_default_str();
  cmd->add_option("--init", lf.init, "Codebook init: quantile or grid")
      ->capture_default_str();
  cmd->add_option("--grid-format", lf.grid_format, "Format for grid init")
      ->capture_default_str();
  cmd->add_option("--grid-scale", lf.grid_scale, "Scale mode for grid init")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Microscaling format emulator"};
  app.name(args.empty() ? "mxemu" : args[0]);
  app.require_subcommand(1);

  QuantizeCmd quant;
  auto* c_quant = app.add_subcommand("quantize", "Quantize then dequantize a tensor");
  c_quant->add_option("--in", quant.in, "Input tensor (.mxt or .csv)")->required();
  c_quant->add_option("--out", quant.out, "Output tensor file");
  c_quant->add_option("--out-dtype", quant.out_dtype, "auto, f32 or f64");
  c_quant->add_option("--codes-out", quant.codes_out, "Write codes and scales (MXQ1)");
  c_quant->add_option("--json", quant.json_path, "Error report path ('-' for stdout)");
  c_quant->add_flag("--dump-unique", quant.dump_unique, "Print distinct output values");
  add_quant_flags(c_quant, quant.q, true);

  CompareCmd cmp;
  auto* c_cmp = app.add_subcommand("compare", "Compare formats on one tensor");
  c_cmp->add_option("--in", cmp.in, "Input tensor")->required();
  c_cmp->add_option("--format", cmp.formats, "Formats to compare")
      ->delimiter(',')
      ->required();
  c_cmp->add_option("--scale", cmp.q.scale, "Shared-scale mode")->capture_default_str();
  c_cmp->add_option("--group-size", cmp.q.group_size, "Group size or 'row'")
      ->capture_default_str();
  c_cmp->add_option("--axis", cmp.q.axis, "Quantization axis")->capture_default_str();
  c_cmp->add_option("--json", cmp.json_path, "Report path ('-' for stdout)");
  c_cmp->add_flag("--lloyd", cmp.lloyd, "Add a Lloyd-Max reference row");
  add_lloyd_flags(c_cmp, cmp.lf);

  StatsCmd st;
  auto* c_st = app.add_subcommand("stats", "Group mean and kurtosis statistics");
  c_st->add_option("--in", st.in, "Input tensor")->required();
  c_st->add_option("--group-size", st.group_size, "Group size or 'row'")
      ->capture_default_str();
  c_st->add_option("--axis", st.axis, "Grouping axis")->capture_default_str();
  c_st->add_option("--json", st.json_path, "Report path ('-' for stdout)");

  RotateCmd rot;
  auto* c_rot = app.add_subcommand("rotate", "Randomized Hadamard rotation");
  c_rot->add_option("--in", rot.in, "Input tensor")->required();
  c_rot->add_option("--out", rot.out, "Output tensor file");
  c_rot->add_option("--out-dtype", rot.out_dtype, "auto, f32 or f64");
  c_rot->add_option("--dim-axis", rot.dim_axis, "Axis to rotate")
      ->capture_default_str();
  c_rot->add_option("--seed", rot.seed, "Sign seed")->capture_default_str();
  c_rot->add_flag("--transpose", rot.transpose, "Apply the inverse rotation");
  c_rot->add_option("--reference", rot.reference,
                    "Report max abs difference against this tensor");

  MatmulCmd mm;
  auto* c_mm = app.add_subcommand("matmul", "Emulated reduced-precision matmul");
  c_mm->add_option("--a", mm.a, "Left operand (M x K)")->required();
  c_mm->add_option("--b", mm.b, "Right operand (K x N)")->required();
  c_mm->add_option("--out", mm.out, "Output tensor file");
  c_mm->add_option("--out-dtype", mm.out_dtype, "f32 or f64")->capture_default_str();
  add_quant_flags(c_mm, mm.q, true);
  c_mm->add_option("--format-b", mm.format_b, "Format of b (defaults to --format)");
  c_mm->add_option("--scale-b", mm.scale_b, "Scale mode of b (defaults to --scale)");
  c_mm->add_option("--accum", mm.accum, "f64 or f32")->capture_default_str();
  c_mm->add_flag("--oracle-check", mm.oracle_check,
                 "Print max abs difference against the float64 oracle");

  LloydCmd ll;
  auto* c_ll = app.add_subcommand("lloydmax", "Cluster-wise Lloyd-Max reference");
  c_ll->add_option("--in", ll.in, "Input tensor")->required();
  c_ll->add_option("--out", ll.out, "Reconstructed tensor file");
  c_ll->add_option("--out-dtype", ll.out_dtype, "auto, f32 or f64");
  c_ll->add_option("--group-size", ll.group_size, "Group size or 'row'")
      ->capture_default_str();
  c_ll->add_option("--json", ll.json_path, "Report path ('-' for stdout)");
  add_lloyd_flags(c_ll, ll.lf);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("mxemu");

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (c_quant->parsed()) quant.run(out);
    if (c_cmp->parsed()) cmp.run(out);
    if (c_st->parsed()) st.run(out);
    if (c_rot->parsed()) rot.run(out);
    if (c_mm->parsed()) mm.run(out);
    if (c_ll->parsed()) ll.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
  return 0;
}

}  // namespace mxemu::cli
