#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmkit/behavior.hpp"
#include "tmkit/cli.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"
#include "tmkit/fsm.hpp"
#include "tmkit/render.hpp"
#include "tmkit/statics.hpp"

namespace tmkit {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
}

bool is_fsm_json(const std::string& path) { return path.ends_with(".json"); }

SModel load_model(const std::string& path) {
  std::string text = read_file(path);
  if (is_fsm_json(path)) return compile_fsm_to_s(load_fsm_json(text));
  return parse_model(text);
}

DModel load_d(const std::string& path, const std::string& regions) {
  SModel m = load_model(path);
  auto changes = regions.empty()
                     ? decompose(m)
                     : decompose_with_regions(m, parse_regions(read_file(regions)));
  return order_changes(m, std::move(changes));
}

// Sends text to a file when one is named, else to `out`.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err, CliEnvironment env)
      : out_(out), err_(err), env_(env) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Thinging-machine modeling toolkit", "tmkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tmkit 1.0.0");

    std::string input;
    std::string output;
    std::string regions;
    std::string script_path;
    std::string stage;
    std::uint64_t max_ticks = 10'000;
    bool oracle = false;

    auto add_input = [&](CLI::App* sub, const char* what) {
      sub->add_option("input", input, what)->required()->check(CLI::ExistingFile);
    };

    auto* check = app.add_subcommand("check", "Validate a model and list diagnostics");
    add_input(check, "Model file (.tm or .fsm.json)");

    auto* import = app.add_subcommand("import-fsm", "Compile a state machine to a .tm model");
    add_input(import, "State machine (.fsm.json)");
    import->add_option("-o,--output", output, "Model file to write")->required();

    auto* split = app.add_subcommand("decompose", "List the static changes of a model");
    add_input(split, "Model file (.tm or .fsm.json)");
    split->add_option("--regions", regions, "Region file with a chosen division")
        ->check(CLI::ExistingFile);

    auto* order = app.add_subcommand("order", "Summarize the D model");
    add_input(order, "Model file (.tm or .fsm.json)");
    order->add_option("--regions", regions, "Region file with a chosen division")
        ->check(CLI::ExistingFile);

    auto* sim = app.add_subcommand("simulate", "Run a stimulus script and print the trace");
    add_input(sim, "Model file (.tm or .fsm.json)");
    sim->add_option("--script", script_path, "Stimulus script")
        ->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--max-ticks", max_ticks, "Tick bound")->check(CLI::PositiveNumber);
    sim->add_flag("--oracle", oracle,
                  "Check the run against the state machine interpreter");
    sim->add_option("-o,--output", output, "Trace file to write");

    auto* render = app.add_subcommand("render", "Emit Graphviz DOT");
    add_input(render, "Model file (.tm or .fsm.json)");
    render->add_option("--stage", stage, "s, d or b")
        ->required()
        ->check(CLI::IsMember({"s", "d", "b"}));
    render->add_option("--script", script_path, "Stimulus script for --stage b")
        ->check(CLI::ExistingFile);
    render->add_option("--regions", regions, "Region file with a chosen division")
        ->check(CLI::ExistingFile);
    render->add_option("--max-ticks", max_ticks, "Tick bound")->check(CLI::PositiveNumber);
    render->add_option("-o,--output", output, "DOT file to write");

    auto* events = app.add_subcommand("events", "Print the event catalog");
    add_input(events, "Model file (.tm or .fsm.json)");
    events->add_option("--regions", regions, "Region file with a chosen division")
        ->check(CLI::ExistingFile);

    std::vector<std::string> argv_storage{"tmkit"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const std::string& arg : argv_storage) argv.push_back(arg.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e, out_, err_);
      return code == 0 ? 0 : 2;
    }

    try {
      if (check->parsed()) return run_check(input);
      if (import->parsed()) {
        write_file(output, print_model(compile_fsm_to_s(load_fsm_json(read_file(input)))));
        return 0;
      }
      if (split->parsed()) {
        out_ << format_regions(load_d(input, regions).changes);
        return 0;
      }
      if (order->parsed()) return run_order(load_d(input, regions));
      if (sim->parsed()) {
        if (oracle && !is_fsm_json(input)) {
          err_ << "--oracle: needs a .fsm.json input\n";
          return 2;
        }
        return run_simulate(input, script_path, max_ticks, oracle, output);
      }
      if (render->parsed()) {
        return run_render(input, regions, stage, script_path, max_ticks, output);
      }
      if (events->parsed()) {
        for (const CatalogEntry& entry : event_catalog(load_d(input, regions))) {
          out_ << "change=" << entry.change << " kind=" << to_string(entry.kind)
               << " name=" << quote(entry.name) << '\n';
        }
        return 0;
      }
    } catch (const Error& e) {
      report(input, e);
      return 1;
    }
    return 2;
  }

 private:
  std::string paint(std::string_view text, std::string_view code) const {
    if (!env_.color) return std::string(text);
    return "\033[" + std::string(code) + "m" + std::string(text) + "\033[0m";
  }

  void report(const std::string& path, const Error& e) {
    err_ << path << ": " << paint("error", "1;31") << '[' << to_string(e.code())
         << "]: " << e.what() << '\n';
  }

  int run_check(const std::string& input) {
    SModel m = load_model(input);
    auto diagnostics = validate_s(m);
    for (const Diagnostic& d : diagnostics) {
      err_ << input << ": " << paint(std::string(to_string(d.rule)), "1;33")
           << ": " << d.message;
      for (std::size_t i = 0; i < d.stages.size(); ++i) {
        err_ << (i == 0 ? " [" : ", ") << d.stages[i];
      }
      err_ << (d.stages.empty() ? "" : "]") << '\n';
    }
    if (!diagnostics.empty()) return 1;
    out_ << "model " << m.name() << ": ok (" << m.thimacs().size()
         << " thimacs, " << m.stages().size() << " stages, " << m.flows().size()
         << " flows, " << m.triggers().size() << " triggers)\n";
    return 0;
  }

  int run_order(const DModel& d) {
    out_ << "# " << d.changes.size() << " static changes, "
         << d.precedence.size() << " precedence pairs\n";
    for (const StaticChange& change : d.changes) {
      out_ << "change=" << change.id << " kind=" << to_string(change.kind)
           << " name=" << quote(change.label) << '\n';
    }
    for (const auto& [a, b] : d.precedence) {
      out_ << "before=" << a << " after=" << b << '\n';
    }
    for (const auto& [a, b] : simultaneous(d)) {
      out_ << "simultaneous=" << a << ',' << b << '\n';
    }
    return 0;
  }

  int run_simulate(const std::string& input, const std::string& script_path,
                   std::uint64_t max_ticks, bool oracle, const std::string& output) {
    DModel d = load_d(input, "");
    StimulusScript script = parse_script(read_file(script_path));
    BModel b = simulate(d, script, max_ticks);
    for (const StimulusOutcome& outcome : b.stimuli) {
      if (!outcome.fired) {
        err_ << "dropped tick=" << outcome.tick << " stimulus=" << outcome.stimulus
             << '\n';
      }
    }
    emit(out_, output, trace_text(b));
    if (!oracle) return 0;

    FsmSpec spec = load_fsm_json(read_file(input));
    std::vector<std::string> names;
    for (const ScriptEntry& entry : script) names.push_back(entry.stimulus);
    FsmRun run = fsm_run(spec, names);
    bool same_states =
        project_to_fsm_trace(b, d) == run.state_sequence(spec.initial);
    bool same_drops = b.stimuli.size() == run.history.size();
    for (std::size_t i = 0; same_drops && i < b.stimuli.size(); ++i) {
      same_drops = b.stimuli[i].fired == run.history[i].enabled;
    }
    if (b.truncated || !same_states || !same_drops) {
      err_ << paint("oracle mismatch", "1;31") << ": simulation and state machine disagree"
           << (b.truncated ? " (run truncated)" : "") << '\n';
      return 1;
    }
    err_ << "oracle: " << run.history.size() << " stimuli agree\n";
    return 0;
  }

  int run_render(const std::string& input, const std::string& regions,
                 const std::string& stage, const std::string& script_path,
                 std::uint64_t max_ticks, const std::string& output) {
    if (stage == "s") {
      emit(out_, output, render_s(load_model(input)).text);
      return 0;
    }
    DModel d = load_d(input, regions);
    if (stage == "d") {
      emit(out_, output, render_d(d).text);
      return 0;
    }
    StimulusScript script;
    if (!script_path.empty()) script = parse_script(read_file(script_path));
    emit(out_, output, render_b(simulate(d, script, max_ticks)).text);
    return 0;
  }

  std::ostream& out_;
  std::ostream& err_;
  CliEnvironment env_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, CliEnvironment env) {
  return Cli(out, err, env).run(args);
}

}  // namespace tmkit
