use std::error::Error as StdError;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use herglotz::analysis::{
    first_radial_zero, nodal_distance, rel_l2_error, render_heatmap, render_level_sets, render_mollweide,
    zero_level_set, LevelSet, Part, Slice,
};
use herglotz::ballapprox::{asymptotic_density, density_from_modal, modal_inner_products, spherical_harmonic_moments};
use herglotz::experiment::{
    plane_target, run, volume_target, ExperimentConfig, Method, TargetConfig, DESK_SAMPLES_2D, DESK_SAMPLES_3D,
    PAPER_SAMPLES_2D, PAPER_SAMPLES_3D,
};
use herglotz::fieldeval::{boundary_excitation, eval_herglotz, helmholtz_residual, BoundarySample, HerglotzDensity};
use herglotz::grid::{dft_forward, dft_inverse, Field, Grid, Precision, Sampled, Spectrum};
use herglotz::planeapprox::{
    plane_density_from_spectrum, plane_density_padded, tr_density_from_spectrum, tr_density_padded, PlaneField,
};
use herglotz::spheremesh::build_sphere_mesh;
use herglotz::WaveContext;
use num_complex::Complex64;

use crate::{
    Cli, Command, DensityArgs, DensityMethod, DftArgs, EvalArgs, ExciteArgs, LevelsetArgs, MetricsArgs, PartArg,
    RenderKind, TargetGenArgs,
};

type CliResult<T = ()> = Result<T, Box<dyn StdError>>;

/// Settings shared by every command.
struct Env {
    config: ExperimentConfig,
    out: PathBuf,
}

impl Env {
    /// `explicit`, or `default` inside the output directory.
    fn output(&self, explicit: &Option<PathBuf>, default: &str) -> CliResult<PathBuf> {
        let path = explicit.clone().unwrap_or_else(|| self.out.join(default));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        Ok(path)
    }

    fn context(&self) -> CliResult<WaveContext> {
        Ok(WaveContext::from_wavelength(self.config.wavelength)?)
    }
}

pub fn dispatch(cli: Cli) -> CliResult {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.paper_scale |= cli.paper_scale;
    if let Some(p) = cli.spectral_padding {
        config.spectral_padding = p;
    }
    let out = match (&cli.out, &cli.command) {
        (Some(dir), _) => dir.clone(),
        (None, Command::Run) => config.output.clone(),
        (None, _) => PathBuf::from("."),
    };
    config.output = out.clone();
    let env = Env { config, out };
    match cli.command {
        Command::Run => run_experiment(&env),
        Command::TargetGen(a) => target_gen(&env, &a),
        Command::Dft(a) => dft(&env, &a),
        Command::Density(a) => density(&env, &a),
        Command::Eval(a) => eval(&env, &a),
        Command::Levelset(a) => levelset(&env, &a),
        Command::Metrics(a) => metrics(&env, &a),
        Command::Render(a) => render(&env, a.kind),
        Command::Excite(a) => excite(&env, &a),
    }
}

fn run_experiment(env: &Env) -> CliResult {
    let result = run(&env.config)?;
    println!(
        "wrote {} files and manifest.json to {}",
        result.manifest.files.len(),
        env.out.display()
    );
    println!("{}", serde_json::to_string_pretty(&result.metrics)?);
    Ok(())
}

fn save_field<const D: usize>(f: &Field<D>, path: &Path) -> CliResult {
    Ok(f.save(path, Precision::Complex128)?)
}

fn save_spectrum<const D: usize>(s: &Spectrum<D>, path: &Path) -> CliResult {
    Ok(s.save(path, Precision::Complex128)?)
}

fn target_gen(env: &Env, args: &TargetGenArgs) -> CliResult {
    let config = &env.config;
    let dim = match config.target {
        TargetConfig::Bitmap { .. } => 2,
        TargetConfig::Tetra { .. } => 3,
        TargetConfig::Gaussian { .. } => args.dim,
    };
    let samples = args.samples.or(config.grid.samples).unwrap_or(match (dim, config.paper_scale) {
        (2, false) => DESK_SAMPLES_2D,
        (2, true) => PAPER_SAMPLES_2D,
        (_, false) => DESK_SAMPLES_3D,
        (_, true) => PAPER_SAMPLES_3D,
    });
    let half = config.grid.half_extent * config.wavelength;
    let path = env.output(&args.output, "target.hwf")?;
    match dim {
        2 => save_field(&plane_target(config, &Grid::new(half, samples)?)?, &path)?,
        3 => save_field(&volume_target(config, &Grid::new(half, samples)?)?, &path)?,
        d => return Err(format!("targets are 2- or 3-dimensional, not {d}").into()),
    }
    println!("{}", path.display());
    Ok(())
}

fn dft(env: &Env, args: &DftArgs) -> CliResult {
    let input = Sampled::load(&args.input)?;
    let default = if args.inverse { "field.hwf" } else { "spectrum.hwf" };
    let path = env.output(&args.output, default)?;
    match (input, args.inverse) {
        (Sampled::Field2(f), false) => save_spectrum(&dft_forward(&f), &path)?,
        (Sampled::Field3(f), false) => save_spectrum(&dft_forward(&f), &path)?,
        (Sampled::Spectrum2(s), true) => save_field(&dft_inverse(&s), &path)?,
        (Sampled::Spectrum3(s), true) => save_field(&dft_inverse(&s), &path)?,
        (_, true) => return Err("--inverse needs a spectrum file".into()),
        (_, false) => return Err("the forward DFT needs a field file".into()),
    }
    println!("{}", path.display());
    Ok(())
}

fn density(env: &Env, args: &DensityArgs) -> CliResult {
    let context = env.context()?;
    let triangles = args.triangles.unwrap_or(env.config.mesh_triangles);
    let mesh = Arc::new(build_sphere_mesh(context.k(), triangles)?);
    let padding = env.config.spectral_padding;
    let input = Sampled::load(&args.input)?;
    let g = match args.method {
        DensityMethod::Plane | DensityMethod::TimeReversal => {
            let tr = args.method == DensityMethod::TimeReversal;
            match input {
                Sampled::Field2(f) => {
                    let f = PlaneField::new(f, context);
                    if tr {
                        tr_density_padded(&f, mesh, padding)?
                    } else {
                        plane_density_padded(&f, mesh, padding)?
                    }
                }
                Sampled::Spectrum2(s) if padding == 1 => {
                    if tr {
                        tr_density_from_spectrum(&s, mesh)?
                    } else {
                        plane_density_from_spectrum(&s, mesh)?
                    }
                }
                Sampled::Spectrum2(_) => return Err("spectral padding needs the field, not its spectrum".into()),
                _ => return Err("planar methods need a 2D field or spectrum".into()),
            }
        }
        DensityMethod::Asymptotic | DensityMethod::Modal => {
            let spectrum = match input {
                Sampled::Field3(f) => dft_forward(&f),
                Sampled::Spectrum3(s) => s,
                _ => return Err("ball methods need a 3D field or spectrum".into()),
            };
            if args.method == DensityMethod::Asymptotic {
                asymptotic_density(&spectrum, mesh)?
            } else {
                let (n, r) = match (args.max_degree, args.radius, &env.config.method) {
                    (Some(n), Some(r), _) => (n, r),
                    (n, r, Method::BallModal { max_degree, radius }) => (n.unwrap_or(*max_degree), r.unwrap_or(*radius)),
                    _ => return Err("the modal method needs --max-degree and --radius".into()),
                };
                let moments = spherical_harmonic_moments(&spectrum, &mesh, n)?;
                let coeffs = modal_inner_products(&moments, n, context.k(), r * env.config.wavelength)?;
                if let Some(p) = &args.coefficients {
                    coeffs.save_csv(p)?;
                }
                density_from_modal(&coeffs, mesh)?
            }
        }
    };
    let path = env.output(&args.output, "density.csv")?;
    g.save_csv(&path)?;
    println!("{}", path.display());
    Ok(())
}

/// Numeric CSV rows with exactly `cols` columns. A non-numeric first line is
/// taken as a header; blank lines and `#` comments are skipped.
fn read_rows(path: &Path, cols: usize) -> CliResult<Vec<Vec<f64>>> {
    let reader = BufReader::new(File::open(path).map_err(|e| format!("{}: {e}", path.display()))?);
    let mut rows = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) if row.len() == cols => rows.push(row),
            Ok(row) => {
                return Err(format!("{}:{}: expected {cols} columns, found {}", path.display(), no + 1, row.len()).into())
            }
            Err(_) if no == 0 => continue,
            Err(e) => return Err(format!("{}:{}: {e}", path.display(), no + 1).into()),
        }
    }
    Ok(rows)
}

fn eval(env: &Env, args: &EvalArgs) -> CliResult {
    let g = HerglotzDensity::load_csv(&args.density)?;
    let lam = env.config.wavelength;
    if let Some(points) = &args.points {
        let pts: Vec<[f64; 3]> = read_rows(points, 3)?.iter().map(|r| [r[0], r[1], r[2]]).collect();
        let values = eval_herglotz(&g, &pts);
        let path = env.output(&args.output, "values.csv")?;
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "x,y,z,re,im")?;
        for (p, v) in pts.iter().zip(&values) {
            writeln!(w, "{},{},{},{},{}", p[0], p[1], p[2], v.re, v.im)?;
        }
        w.flush()?;
        println!("{}", path.display());
        return Ok(());
    }
    let x3 = args.plane.ok_or("eval needs --plane or --points")?;
    let samples = args.samples.unwrap_or(env.config.slice_samples());
    let half = args.half_extent.unwrap_or(env.config.slices.half_extent) * lam;
    let slice = Slice::evaluate(&g, half, samples, x3 * lam)?;
    let path = env.output(&args.output, "slice.hwf")?;
    save_field(&slice.field, &path)?;
    println!("{}", path.display());
    Ok(())
}

fn load_plane_field(path: &Path) -> CliResult<Field<2>> {
    match Sampled::load(path)? {
        Sampled::Field2(f) => Ok(f),
        _ => Err(format!("{} is not a 2D field", path.display()).into()),
    }
}

fn levelset(env: &Env, args: &LevelsetArgs) -> CliResult {
    let f = load_plane_field(&args.input)?;
    let set = zero_level_set(&f);
    let path = env.output(&args.output, "levelset.txt")?;
    set.save(&path)?;
    println!("{} polylines -> {}", set.len(), path.display());
    Ok(())
}

fn as_field<const D: usize>(grid: &Grid<D>, values: &[Complex64]) -> CliResult<Field<D>> {
    Ok(Field::new(*grid, values.to_vec())?)
}

fn rel_l2_files(a: &Path, b: &Path) -> CliResult<f64> {
    let value = match (Sampled::load(a)?, Sampled::load(b)?) {
        (Sampled::Field2(x), Sampled::Field2(y)) => rel_l2_error(&x, &y)?,
        (Sampled::Field3(x), Sampled::Field3(y)) => rel_l2_error(&x, &y)?,
        (Sampled::Spectrum2(x), Sampled::Spectrum2(y)) => rel_l2_error(
            &as_field(x.grid(), x.values())?,
            &as_field(y.grid(), y.values())?,
        )?,
        (Sampled::Spectrum3(x), Sampled::Spectrum3(y)) => rel_l2_error(
            &as_field(x.grid(), x.values())?,
            &as_field(y.grid(), y.values())?,
        )?,
        _ => return Err("files hold different kinds of samples".into()),
    };
    Ok(value)
}

fn metrics(env: &Env, args: &MetricsArgs) -> CliResult {
    let mut any = false;
    if let Some(pair) = &args.rel_l2 {
        println!("rel_l2 {}", rel_l2_files(&pair[0], &pair[1])?);
        any = true;
    }
    if let Some(pair) = &args.nodal {
        let (a, b) = (LevelSet::load(&pair[0])?, LevelSet::load(&pair[1])?);
        println!("nodal_distance {}", nodal_distance(&a, &b)?);
        any = true;
    }
    if let Some(path) = &args.radial_zero {
        match first_radial_zero(&load_plane_field(path)?) {
            Some(r) => println!("first_radial_zero {r}"),
            None => println!("first_radial_zero none"),
        }
        any = true;
    }
    if let Some(path) = &args.residual {
        let g = HerglotzDensity::load_csv(path)?;
        let grid = Grid::<3>::new(args.half_extent * env.config.wavelength, args.samples)?;
        println!("helmholtz_residual {}", helmholtz_residual(&g, &grid)?);
        any = true;
    }
    if !any {
        return Err("choose at least one of --rel-l2, --nodal, --radial-zero, --residual".into());
    }
    Ok(())
}

fn render(env: &Env, kind: RenderKind) -> CliResult {
    let (img, path) = match kind {
        RenderKind::Heatmap {
            input,
            vmin,
            vmax,
            output,
        } => (
            render_heatmap(&load_plane_field(&input)?, vmin, vmax)?,
            env.output(&output, "heatmap.png")?,
        ),
        RenderKind::Mollweide {
            input,
            vmin,
            vmax,
            part,
            width,
            output,
        } => {
            let g = HerglotzDensity::load_csv(&input)?;
            let part = match part {
                PartArg::Re => Part::Real,
                PartArg::Im => Part::Imag,
            };
            (
                render_mollweide(&g, vmin, vmax, part, width)?,
                env.output(&output, "mollweide.png")?,
            )
        }
        RenderKind::Contours {
            inputs,
            half_extent,
            size,
            output,
        } => {
            let sets = inputs
                .iter()
                .map(|p| LevelSet::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let colors = [[0, 0, 0], [220, 0, 0]];
            let layers: Vec<_> = sets.iter().zip(colors).collect();
            (
                render_level_sets(&layers, half_extent * env.config.wavelength, size)?,
                env.output(&output, "contours.png")?,
            )
        }
    };
    img.save_png(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn excite(env: &Env, args: &ExciteArgs) -> CliResult {
    let g = HerglotzDensity::load_csv(&args.density)?;
    let samples = read_rows(&args.samples, 8)?
        .iter()
        .map(|r| BoundarySample::new([r[0], r[1], r[2]], [r[3], r[4], r[5]], Complex64::new(r[6], r[7])))
        .collect::<Result<Vec<_>, _>>()?;
    let phi = boundary_excitation(&g, &samples);
    let path = env.output(&args.output, "excitation.csv")?;
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "re,im")?;
    for v in &phi {
        writeln!(w, "{},{}", v.re, v.im)?;
    }
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}
