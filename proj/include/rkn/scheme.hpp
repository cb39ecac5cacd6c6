#pragma once

// Splitting-scheme coefficient registry.
//
// A scheme is stored as the independent half of its palindromic coefficient
// lists plus one closure entry per list. Closure entries are never
// transcribed: they are recomputed from the consistency conditions
// sum(a) = sum(b) = 1, so every registered scheme is consistent by
// construction.
//
// Composition convention used throughout the library: the first entry of a
// FlowSchedule is the first flow applied to the state.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rkn/errors.hpp"

namespace rkn {

enum class SchemeKind { ABA, BAB, SS };
enum class FlowKind { Drift, Kick };
enum class StrangKernel { ABA, BAB };

inline constexpr double kConsistencyTolerance = 1e-14;

struct SchemeMetadata {
  std::optional<double> effective_error;
  std::optional<double> delta_1norm;
  std::optional<double> delta_maxnorm;
  std::string provenance;
};

struct SchemeCoefficients {
  std::string name;
  SchemeKind kind = SchemeKind::ABA;
  int stages = 0;
  int order = 0;
  // Closure-completed half lists, index order a_1, a_2, ...
  std::vector<double> a_half;
  std::vector<double> b_half;
  std::vector<double> gammas;  // SS only, closure-completed half list
  SchemeMetadata metadata;
};

// Coefficient identity, ignoring name and metadata.
inline bool same_coefficients(const SchemeCoefficients& x,
                              const SchemeCoefficients& y) {
  return x.kind == y.kind && x.stages == y.stages && x.order == y.order &&
         x.a_half == y.a_half && x.b_half == y.b_half && x.gammas == y.gammas;
}

struct FlowEntry {
  FlowKind kind;
  double coefficient;
  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

struct FlowSchedule {
  std::vector<FlowEntry> entries;
  bool fsal_mergeable = false;
  int stages = 0;

  FlowSchedule reversed() const {
    FlowSchedule r = *this;
    std::reverse(r.entries.begin(), r.entries.end());
    return r;
  }
};

struct CoefficientNorms {
  double delta_1 = 0;
  double delta_max = 0;
  // Which half-list coefficient attains delta_max (1-based, first
  // occurrence in unfolded order).
  FlowKind argmax_kind = FlowKind::Drift;
  int argmax_index = 0;
};

inline std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::ABA: return "ABA";
    case SchemeKind::BAB: return "BAB";
    case SchemeKind::SS: return "SS";
  }
  return "?";
}

namespace detail {

// Full (unfolded) lengths of the a- and b-lists.
inline int full_a_length(SchemeKind kind, int stages) {
  return kind == SchemeKind::ABA ? stages + 1 : stages;
}
inline int full_b_length(SchemeKind kind, int stages) {
  return kind == SchemeKind::ABA ? stages : stages + 1;
}
inline int half_length(int full) { return (full + 1) / 2; }

// Closure entry for a palindromic list of `full` entries whose first
// half-1 entries are `independent`: the centre of an odd list is
// 1 - 2*sum, the last half entry of an even list is 1/2 - sum.
inline double closure(const std::vector<double>& independent, int full) {
  long double s = 0;
  for (double x : independent) s += x;
  if (full % 2 == 1) return static_cast<double>(1.0L - 2.0L * s);
  return static_cast<double>(0.5L - s);
}

inline std::vector<double> mirror(const std::vector<double>& half, int full) {
  std::vector<double> out(static_cast<std::size_t>(full));
  for (int i = 0; i < full; ++i) {
    const int j = std::min(i, full - 1 - i);
    out[static_cast<std::size_t>(i)] = half[static_cast<std::size_t>(j)];
  }
  return out;
}

inline double full_sum(const std::vector<double>& half, int full) {
  long double s = 0;
  for (double x : mirror(half, full)) s += x;
  return static_cast<double>(s);
}

inline double parse_real(std::string_view text) {
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0' || !std::isfinite(v))
    throw InvalidArgument("not a finite decimal: " + buf);
  return v;
}

inline std::vector<double> complete(std::vector<double> independent,
                                    int full) {
  const double c = closure(independent, full);
  independent.push_back(c);
  return independent;
}

// Merges adjacent same-kind flows and recomputes the stage count.
inline FlowSchedule finalize(std::vector<FlowEntry> raw) {
  FlowSchedule s;
  for (const FlowEntry& e : raw) {
    if (!s.entries.empty() && s.entries.back().kind == e.kind)
      s.entries.back().coefficient += e.coefficient;
    else
      s.entries.push_back(e);
  }
  for (const FlowEntry& e : s.entries)
    if (e.kind == FlowKind::Kick) ++s.stages;
  s.fsal_mergeable = s.entries.size() > 1 &&
                     s.entries.front().kind == s.entries.back().kind;
  return s;
}

struct EmbeddedScheme {
  const char* name;
  SchemeKind kind;
  int stages;
  int order;
  std::vector<const char*> a;  // independent entries only
  std::vector<const char*> b;
  double effective_error;
  double delta_1;
  double delta_max;
};

// 30-digit transcriptions of the published 8th-order coefficients, plus the
// published (E_f, Delta, delta) triple kept as metadata.
inline const std::vector<EmbeddedScheme>& embedded_schemes() {
  static const std::vector<EmbeddedScheme> table = {
      {"A17", SchemeKind::ABA, 17, 8,
       {"0.0520924343840339006426037968353", "0.225287493267702165807274831864",
        "0.416276189612257117795363856737", "-0.384567270213950399652168569029",
        "0.0997271783470514816674547589369", "-0.108833834399100218757003157958",
        "0.222010736648991680848341975522", "0.523879522036734296002247438223"},
       {"0.145850304812644731608096609877", "0.255156544139293944162028807345",
        "0.0181334688208317251361460684041", "-0.179040110299264554587007062749",
        "-0.118470801433302245053382954342", "0.186461689273821083344937258279",
        "0.459041581767136840219244627361", "-0.003660836270318358975321459399"},
       3.45, 8.42, 0.5459},
      {"A18", SchemeKind::ABA, 18, 8,
       {"0.0866003822712445920135805954462", "-0.0231572735424388070228714693753",
        "0.191410576083774088999564416369", "0.378895558692931579545387584925",
        "-0.0467359566364556111599485526051", "-0.156198111997810415438979605642",
        "0.156025836895094823718831871041", "0.252844012473796333586850465807",
        "-0.640644212172254239866860564270"},
       {"-0.08", "0.209460550048243262121199483001",
        "0.274887805875735483503233064415", "-0.224214208870409561366168655624",
        "0.347657740563761656321390026010", "-0.168783183866211679175007668385",
        "0.144209344805460873709120777707", "0.0116851121360265483381405054244"},
       3.65, 7.42, 0.6406},
      {"A19", SchemeKind::ABA, 19, 8,
       {"0.0505805", "0.149999", "-0.0551795510771615573511026950361",
        "0.423755898835337951482264998051", "-0.213495353584659048059672194633",
        "-0.0680769774574032619111630736274", "0.227917056974013435948887201671",
        "-0.235373619381058906524740047732", "0.387413869179878047816794031058"},
       {"0.129478606560536730662493794395", "0.222257260092671143423043559581",
        "-0.0577514893325147204757023246320", "-0.0578312262103924910221345032763",
        "0.103087297437175356747933252265", "-0.140819612554090768205554103887",
        "0.0234462603492826276699713718626", "0.134854517356684096617882205068",
        "0.0287973821073779306345172160211"},
       2.76, 5.98, 0.4237},
      {"B17", SchemeKind::BAB, 17, 8,
       {"0.160227696073839513690970240076", "0.306354507436867319879440957100",
        "0.308395508895171191756544975556", "0.120362086566233408450063177659",
        "-0.622888687549183872072186218718", "0.635560951632990078378672016548",
        "-0.144226974795419229640437363913", "-0.284867527074173816678992817545"},
       {"0.0514196142537210073343152693459", "0.250497030318342871458417941091",
        "0.512412268300327350035492806653", "-0.231597138650894401279645184364",
        "0.116091323536875759881216298975", "-0.0098365173246965763985763034283",
        "-0.108032771466281638634277563747", "0.249039864198023642002940910070"},
       2.80, 8.93, 0.6355},
      {"B18", SchemeKind::BAB, 18, 8,
       {"0.144410089394373457971755553148", "0.911935520865154315536815857376",
        "-0.00072932909837392655161199996844", "-0.930317101800698721159455541447",
        "0.253804074671714046593439154323", "0.147948981530918626913598733391",
        "-0.448814759614614928125216243784", "0.0824123980794580106751237195418"},
       {"0.045", "0.459016679491512416807266107555",
        "-0.0456553445594333153223655352757", "0.0457031020401841003192648096559",
        "-0.216814341025322492810152535338", "0.163168264552484857133047358600",
        "-0.0857080319814376219389850039430", "0.0265745810650523466142922093591",
        "-0.0365538332992893220147096150675"},
       3.44, 9.68, 0.9303},
      {"B19", SchemeKind::BAB, 19, 8,
       {"0.337548675291317241942440116575", "-0.223647977575409990331768222380",
        "0.168949714872223740906385138015", "0.171179938816205886154783136334",
        "-0.349765168067292877221144631312", "0.523808861006312397712070357524",
        "-0.194208871063049124066394765282", "-0.323496751337931087309823477561",
        "0.322817287614899749216601693799"},
       {"0.036132460472136313416730168194", "0.012697863961074113381675193011",
        "0.201318391240629276109068041836", "0.135683350134504233201330671671",
        "-0.0579071833999963041504740663015", "-0.0772509501792649549463874931821",
        "-0.00264758266409925952822161203471", "-0.0329844384945603065320797537355",
        "0.0476781560950366927530646289755"},
       3.41, 6.94, 0.5238},
  };
  return table;
}

}  // namespace detail

// Checks half-list lengths, palindromic consistency, and the unit sums.
inline void validate(const SchemeCoefficients& s) {
  if (s.stages <= 0) throw InconsistentScheme(s.name + ": stages must be positive");
  if (s.kind == SchemeKind::SS) {
    if (s.gammas.size() != static_cast<std::size_t>(detail::half_length(s.stages)))
      throw InconsistentScheme(s.name + ": gamma half-list length mismatch");
    if (std::abs(detail::full_sum(s.gammas, s.stages) - 1.0) > kConsistencyTolerance)
      throw InconsistentScheme(s.name + ": gammas do not sum to 1");
    return;
  }
  const int la = detail::full_a_length(s.kind, s.stages);
  const int lb = detail::full_b_length(s.kind, s.stages);
  if (s.a_half.size() != static_cast<std::size_t>(detail::half_length(la)) ||
      s.b_half.size() != static_cast<std::size_t>(detail::half_length(lb)))
    throw InconsistentScheme(s.name + ": half-list length mismatch");
  if (std::abs(detail::full_sum(s.a_half, la) - 1.0) > kConsistencyTolerance)
    throw InconsistentScheme(s.name + ": a-coefficients do not sum to 1");
  if (std::abs(detail::full_sum(s.b_half, lb) - 1.0) > kConsistencyTolerance)
    throw InconsistentScheme(s.name + ": b-coefficients do not sum to 1");
}

inline std::vector<std::string> scheme_names() {
  std::vector<std::string> names;
  for (const auto& e : detail::embedded_schemes()) names.emplace_back(e.name);
  names.emplace_back("STRANG_ABA");
  names.emplace_back("STRANG_BAB");
  return names;
}

inline SchemeCoefficients build_scheme(std::string_view name) {
  SchemeCoefficients s;
  s.name = std::string(name);
  s.metadata.provenance = "embedded";
  if (name == "STRANG_ABA" || name == "STRANG_BAB") {
    s.kind = name == "STRANG_ABA" ? SchemeKind::ABA : SchemeKind::BAB;
    s.stages = 1;
    s.order = 2;
    const int la = detail::full_a_length(s.kind, 1);
    const int lb = detail::full_b_length(s.kind, 1);
    s.a_half = detail::complete({}, la);
    s.b_half = detail::complete({}, lb);
    validate(s);
    return s;
  }
  for (const auto& e : detail::embedded_schemes()) {
    if (name != e.name) continue;
    s.kind = e.kind;
    s.stages = e.stages;
    s.order = e.order;
    std::vector<double> a, b;
    for (const char* x : e.a) a.push_back(detail::parse_real(x));
    for (const char* x : e.b) b.push_back(detail::parse_real(x));
    s.a_half = detail::complete(std::move(a), detail::full_a_length(e.kind, e.stages));
    s.b_half = detail::complete(std::move(b), detail::full_b_length(e.kind, e.stages));
    s.metadata.effective_error = e.effective_error;
    s.metadata.delta_1norm = e.delta_1;
    s.metadata.delta_maxnorm = e.delta_max;
    validate(s);
    return s;
  }
  throw UnknownScheme(std::string(name));
}

// Palindromic composition of Strang kernels with the given full weight
// list, adjacent same-kind flows merged across kernel boundaries.
inline FlowSchedule compose_strang(const std::vector<double>& weights,
                                   StrangKernel kernel) {
  const FlowKind outer = kernel == StrangKernel::ABA ? FlowKind::Drift : FlowKind::Kick;
  const FlowKind inner = kernel == StrangKernel::ABA ? FlowKind::Kick : FlowKind::Drift;
  std::vector<FlowEntry> raw;
  for (double w : weights) {
    raw.push_back({outer, 0.5 * w});
    raw.push_back({inner, w});
    raw.push_back({outer, 0.5 * w});
  }
  return detail::finalize(std::move(raw));
}

inline FlowSchedule unfold(const SchemeCoefficients& s,
                           StrangKernel ss_kernel = StrangKernel::ABA) {
  validate(s);
  if (s.kind == SchemeKind::SS)
    return compose_strang(detail::mirror(s.gammas, s.stages), ss_kernel);
  const auto a = detail::mirror(s.a_half, detail::full_a_length(s.kind, s.stages));
  const auto b = detail::mirror(s.b_half, detail::full_b_length(s.kind, s.stages));
  std::vector<FlowEntry> raw;
  if (s.kind == SchemeKind::ABA) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      raw.push_back({FlowKind::Drift, a[i]});
      raw.push_back({FlowKind::Kick, b[i]});
    }
    raw.push_back({FlowKind::Drift, a.back()});
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      raw.push_back({FlowKind::Kick, b[i]});
      raw.push_back({FlowKind::Drift, a[i]});
    }
    raw.push_back({FlowKind::Kick, b.back()});
  }
  return detail::finalize(std::move(raw));
}

inline CoefficientNorms coefficient_norms(const SchemeCoefficients& s) {
  const FlowSchedule sched = unfold(s);
  CoefficientNorms n;
  int drift_pos = 0, kick_pos = 0;
  const int n_drift = static_cast<int>(sched.entries.size()) - sched.stages;
  for (const FlowEntry& e : sched.entries) {
    const double mag = std::abs(e.coefficient);
    n.delta_1 += mag;
    const bool drift = e.kind == FlowKind::Drift;
    const int pos = drift ? drift_pos++ : kick_pos++;
    const int len = drift ? n_drift : sched.stages;
    if (mag > n.delta_max) {
      n.delta_max = mag;
      n.argmax_kind = e.kind;
      n.argmax_index = std::min(pos, len - 1 - pos) + 1;
    }
  }
  return n;
}

// Text form accepted by load_external: independent entries only, printed
// with enough digits to round-trip exactly.
inline std::string encode(const SchemeCoefficients& s) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# " << s.name << "\n";
  if (!s.name.empty()) out << "name " << s.name << "\n";
  out << "kind " << to_string(s.kind) << "\n";
  out << "order " << s.order << "\n";
  out << "stages " << s.stages << "\n";
  auto dump = [&](const char* tag, const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out << tag << ' ' << v[i] << "\n";
  };
  if (s.kind == SchemeKind::SS) {
    dump("gamma", s.gammas);
  } else {
    dump("a", s.a_half);
    dump("b", s.b_half);
  }
  return out.str();
}

// Parses the line-oriented coefficient format. Each list may hold either the
// independent entries (closure computed) or the full half list (closure
// supplied and checked).
inline SchemeCoefficients load_external(std::istream& in,
                                        std::string provenance = "stream") {
  SchemeCoefficients s;
  s.metadata.provenance = std::move(provenance);
  std::vector<double> a, b, g;
  bool have_kind = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) throw ParseError(lineno, "missing value for '" + key + "'");
    if (ls >> extra) throw ParseError(lineno, "trailing token '" + extra + "'");
    auto as_int = [&]() {
      try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size() || v <= 0) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        throw ParseError(lineno, "expected positive integer, got '" + value + "'");
      }
    };
    auto as_real = [&]() {
      try {
        return detail::parse_real(value);
      } catch (const InvalidArgument& e) {
        throw ParseError(lineno, e.what());
      }
    };
    if (key == "name") {
      s.name = value;
    } else if (key == "kind") {
      if (value == "ABA") s.kind = SchemeKind::ABA;
      else if (value == "BAB") s.kind = SchemeKind::BAB;
      else if (value == "SS") s.kind = SchemeKind::SS;
      else throw ParseError(lineno, "unknown kind '" + value + "'");
      have_kind = true;
    } else if (key == "order") {
      s.order = as_int();
    } else if (key == "stages") {
      s.stages = as_int();
    } else if (key == "a") {
      a.push_back(as_real());
    } else if (key == "b") {
      b.push_back(as_real());
    } else if (key == "gamma") {
      g.push_back(as_real());
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_kind) throw ParseError(lineno, "missing 'kind'");
  if (s.stages == 0) throw ParseError(lineno, "missing 'stages'");
  if (s.order == 0) throw ParseError(lineno, "missing 'order'");

  auto fill = [&](std::vector<double> v, int full, const char* tag) {
    const auto half = static_cast<std::size_t>(detail::half_length(full));
    if (v.size() + 1 == half) return detail::complete(std::move(v), full);
    if (v.size() == half) return v;
    throw ParseError(lineno, std::string("expected ") + std::to_string(half - 1) +
                                 " or " + std::to_string(half) + " '" + tag +
                                 "' entries, got " + std::to_string(v.size()));
  };
  if (s.kind == SchemeKind::SS) {
    if (!a.empty() || !b.empty()) throw ParseError(lineno, "SS schemes take only 'gamma' entries");
    s.gammas = fill(std::move(g), s.stages, "gamma");
  } else {
    if (!g.empty()) throw ParseError(lineno, "'gamma' entries require kind SS");
    s.a_half = fill(std::move(a), detail::full_a_length(s.kind, s.stages), "a");
    s.b_half = fill(std::move(b), detail::full_b_length(s.kind, s.stages), "b");
  }
  if (s.name.empty()) s.name = s.metadata.provenance;
  validate(s);
  return s;
}

inline SchemeCoefficients load_external_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open coefficient file: " + path);
  return load_external(in, path);
}

}  // namespace rkn
