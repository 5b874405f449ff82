#include <iostream>

#include "CLI11.hpp"
#include "dimerlab/cli.hpp"
#include "dimerlab/error.hpp"

int main(int argc, char** argv) {
  using namespace dimerlab;
  CLI::App app{"dimerlab: interaction energy of two neutral model atoms"};
  app.set_version_flag("--version", DIMERLAB_VERSION);
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::vector<std::string> overrides;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "INI or JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override, key=value")->take_all();
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CommandContext ctx;
  try {
    ctx.config = load_config(config_file, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  ctx.out_dir = out_dir.empty() ? std::filesystem::path(ctx.config.out_dir) : std::filesystem::path(out_dir);
  ctx.log = &std::cout;
  return run_command(app.get_subcommands().front()->get_name(), ctx, std::cerr);
}
