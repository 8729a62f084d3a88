//! Plain-text summary of a fitted model: header, prior provenance, a table of
//! parameter estimates (with convergence diagnostics for MCMC fits), and the
//! latent-class table. Numbers print at 2 decimals so summaries are stable.

use ratings::diagnostics::quantile;
use ratings::fit::{FitMethod, FitResult};
use ratings::model::Variant;
use ratings::posterior::map_classes;

const SHOWN_ROWS: usize = 8;

fn model_name(variant: Variant) -> &'static str {
    match variant {
        Variant::DawidSkene => "Bayesian Dawid and Skene Model",
        Variant::ClassConditional => "Bayesian Class conditional Dawid and Skene Model",
        Variant::Hierarchical => "Bayesian Hierarchical Dawid and Skene Model",
        Variant::Homogeneous => "Bayesian Homogeneous Dawid and Skene Model",
    }
}

fn parameter_header(variant: Variant) -> &'static str {
    match variant {
        Variant::DawidSkene | Variant::Homogeneous => "pi/theta",
        Variant::ClassConditional => "pi/p",
        Variant::Hierarchical => "pi/mu/sigma/gamma",
    }
}

/// "theta[1,2,3]" -> "theta[1, 2, 3]" for display.
fn display_name(name: &str) -> String {
    name.replace(',', ", ")
}

pub fn render(fit: &FitResult) -> String {
    let mut out = String::new();
    out.push_str("Model:\n");
    out.push_str(model_name(fit.spec.variant));
    out.push_str("\n\nPrior parameters:\n\n");
    out.push_str(&format!("alpha: {}\n", fit.spec.alpha_origin.as_str()));
    if fit.spec.variant != Variant::Hierarchical {
        out.push_str(&format!("beta: {}\n", fit.spec.beta_origin.as_str()));
    }
    out.push_str(&format!("\nFitting method: {}\n\n", match fit.method {
        FitMethod::Mcmc => "MCMC",
        FitMethod::Optim => "optimisation",
    }));

    match fit.method {
        FitMethod::Mcmc => render_mcmc_table(fit, &mut out),
        FitMethod::Optim => render_mode_table(fit, &mut out),
    }

    render_z_table(fit, &mut out);
    out
}

fn render_mcmc_table(fit: &FitResult, out: &mut String) {
    let draws = fit.draws.as_ref().expect("MCMC fit carries draws");
    let diagnostics = fit.diagnostics.as_ref();
    out.push_str(&format!("{} samples:\n", parameter_header(fit.spec.variant)));

    let names: Vec<String> = draws.names.iter().map(|n| display_name(n)).collect();
    let shown = names.len().min(SHOWN_ROWS);
    let name_width = names[..shown].iter().map(|n| n.len()).max().unwrap_or(8).max(6);

    out.push_str(&format!(
        "{:name_width$} {:>6} {:>6} {:>6} {:>6} {:>9}\n",
        "", "mean", "5%", "95%", "Rhat", "ESS"
    ));
    for p in 0..shown {
        let mut pooled = draws.pooled(p);
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        let lo = quantile(&pooled, 0.05);
        let hi = quantile(&pooled, 0.95);
        let (rhat, ess) = diagnostics
            .map(|d| (d.r_hat[p], d.ess[p]))
            .unwrap_or((f64::NAN, f64::NAN));
        out.push_str(&format!(
            "{:name_width$} {:>6.2} {:>6.2} {:>6.2} {:>6.2} {:>9.2}\n",
            names[p], mean, lo, hi, rhat, ess
        ));
    }
    if names.len() > shown {
        out.push_str(&format!("# ... with {} more rows\n", names.len() - shown));
    }
    out.push('\n');
}

fn render_mode_table(fit: &FitResult, out: &mut String) {
    let mode = fit.mode.as_ref().expect("optimisation fit carries a mode");
    out.push_str(&format!("{} point estimates:\n", parameter_header(fit.spec.variant)));
    let layout = mode.params.layout();
    let names: Vec<String> = layout.names().iter().map(|n| display_name(n)).collect();
    let values = mode.params.flatten();
    let shown = names.len().min(SHOWN_ROWS);
    let name_width = names[..shown].iter().map(|n| n.len()).max().unwrap_or(8).max(6);
    out.push_str(&format!("{:name_width$} {:>6}\n", "", "mode"));
    for p in 0..shown {
        out.push_str(&format!("{:name_width$} {:>6.2}\n", names[p], values[p]));
    }
    if names.len() > shown {
        out.push_str(&format!("# ... with {} more rows\n", names.len() - shown));
    }
    out.push('\n');
}

fn render_z_table(fit: &FitResult, out: &mut String) {
    let probs = &fit.class_probabilities;
    let classes = map_classes(probs);
    let items = probs.nrows();
    let k = probs.ncols();
    let shown = items.min(SHOWN_ROWS);
    let name_width = (0..shown).map(|i| format!("z[{}]", i + 1).len()).max().unwrap_or(4);

    out.push_str("z:\n");
    out.push_str(&format!("{:name_width$} {:>3}", "", "MAP"));
    for c in 1..=k {
        out.push_str(&format!(" {:>9}", format!("Pr(z = {c})")));
    }
    out.push('\n');
    for i in 0..shown {
        out.push_str(&format!("{:name_width$} {:>3}", format!("z[{}]", i + 1), classes[i]));
        for c in 0..k {
            out.push_str(&format!(" {:>9.2}", probs[[i, c]]));
        }
        out.push('\n');
    }
    if items > shown {
        out.push_str(&format!("# ... with {} more items\n", items - shown));
    }
}
