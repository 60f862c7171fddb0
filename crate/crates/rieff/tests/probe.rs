#[test]
fn probe_edge_eff() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 2.5, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    println!("interval {:?}, samples {}, breakpoints {:?}", eff.interval, eff.samples.len(),
        eff.breakpoints.iter().map(|b| (b.ell, b.tag, b.family_after)).collect::<Vec<_>>());
    let (f_r, _) = eff.eval(1.0);
    println!("f(1) = {f_r}");
    for i in 0..=20 {
        let ell = i as f64 / 20.0;
        let (f, d) = eff.eval(ell);
        let tv = d * (ell - 1.0) - (f - f_r);
        println!("ell {ell:.3}  f {f:.6}  d {d:.6}  T {tv:.6e}");
    }
}

#[test]
fn probe_welge() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 2.5, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    match rieff::scalar_hull::welge_point(&eff, 1.0, (0.0, 1.0)) {
        Ok(r) => println!("root {r}"),
        Err(e) => println!("err {e}"),
    }
    // count sign changes among sample T values
    let (f_r, _) = eff.eval(1.0);
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for s in &eff.samples {
        let (f, d) = eff.eval(s.ell);
        let tv = d * (s.ell - 1.0) - (f - f_r);
        if let Some(p) = prev { if p * tv < 0.0 { changes += 1; println!("change near {}", s.ell); } }
        prev = Some(tv);
    }
    println!("changes {changes}");
}

#[test]
fn probe_samples() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 2.5, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    let (f_r, _) = eff.eval(1.0);
    for (i, s) in eff.samples.iter().enumerate() {
        if i % 100 == 0 || i + 3 > eff.samples.len() || i < 3 {
            let tv = s.fprime * (s.ell - 1.0) - (s.f - f_r);
            println!("i {i} ell {:.6} f {:.6} fprime {:.6} T {tv:.3e} kind {:?}", s.ell, s.f, s.fprime, s.kind);
        }
    }
}

#[test]
fn probe_eval_vs_nodes() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 2.5, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    for i in [0usize, 100, 250, 260, 270, 280, 290, 299, 300, 301] {
        let s = &eff.samples[i];
        let (f, d) = eff.eval(s.ell);
        println!("i {i} ell {:.8} node(f,d)=({:.6},{:.6}) eval(f,d)=({:.6},{:.6})", s.ell, s.f, s.fprime, f, d);
    }
}

#[test]
fn probe_tv_values() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 2.5, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    let (f_r, d_r) = eff.eval(1.0);
    println!("f_r {f_r} d_r {d_r} n {}", eff.samples.len());
    for i in 280..310 {
        let s = &eff.samples[i];
        let (f, d) = eff.eval(s.ell);
        let tv = d * (s.ell - 1.0) - (f - f_r);
        println!("i {i} ell {:.8} tv {tv:.6e}", s.ell);
    }
}

#[test]
fn probe_mirror() {
    use rieff::config::Tolerances;
    use rieff::eff::*;
    use rieff::flux_model::*;
    use rieff::hugoniot::Orientation;
    use rieff::scalar_hull::hull_solution;
    let t = Tolerances::default();
    let model = FluxModel::new(1.0, 1.7, 1.0).unwrap();
    let eff = build_eff_with(
        &model, State::new(0.0, 0.0), Family::Fast, Orientation::Backward,
        ParamCoordinate::U3,
        EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() }, &t,
    ).unwrap();
    for w in hull_solution(&eff, 0.0, 1.0).unwrap() { println!("up   {:?}", w); }
    for w in hull_solution(&eff, 1.0, 0.0).unwrap() { println!("down {:?}", w); }
}
